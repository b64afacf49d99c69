"""Exact-arithmetic laboratory for congestion games with flow over time."""

from .core import (
    INF,
    ContractError,
    DomainError,
    Edge,
    FotError,
    Instance,
    InternalConsistencyError,
    MalformedFlowError,
    Network,
    NoPathError,
    ParameterError,
    PhaseCapError,
    Scalar,
    SizeCapError,
    UnsupportedTopologyError,
    format_scalar,
    parse_scalar,
    restrict,
    transpose,
)
from .pwl import PiecewiseLinear, minimum

__all__ = [
    "INF",
    "ContractError",
    "DomainError",
    "Edge",
    "FotError",
    "Instance",
    "InternalConsistencyError",
    "MalformedFlowError",
    "Network",
    "NoPathError",
    "ParameterError",
    "PhaseCapError",
    "PiecewiseLinear",
    "Scalar",
    "SizeCapError",
    "UnsupportedTopologyError",
    "format_scalar",
    "minimum",
    "parse_scalar",
    "restrict",
    "transpose",
]
