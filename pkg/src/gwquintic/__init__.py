"""Exact-arithmetic engine for the quintic threefold's enumerative and
emergent geometry: curve counts through the period map, big-phase-space
order parameters, free energies in all computed genera, the associated
integrable flows, and the dual/special-geometry identity suites."""

__version__ = "0.1.0"

from .verify import RunConfig, run_suites  # noqa: F401
