"""Experiment harness: configs, runner, CSV/SVG output, verification suites."""
