"""Bandwidth-parametric CONGEST simulator and algorithm benchmarks."""

__version__ = "0.1.0"

from .engine import (  # noqa: F401
    BandwidthConfig,
    CongestionViolation,
    Envelope,
    NodeProgram,
    RunTrace,
    SimulationTimeout,
    TopologyError,
    measure_bits,
    run,
)
from .graphs import DirectedOverlay, Graph, GraphError, generate  # noqa: F401
