"""Phase-space quantization of qubits and the minimal energy teleportation protocol."""

from .phasespace import (
    Measure,
    PhasePoint,
    QuadratureGrid,
    SymbolExpansion,
    inverse_weyl,
    star_product_exact,
    star_product_integral,
    weyl_symbol,
)
from .qet import ProtocolParams, run_protocol

__all__ = [
    "Measure",
    "PhasePoint",
    "ProtocolParams",
    "QuadratureGrid",
    "SymbolExpansion",
    "inverse_weyl",
    "run_protocol",
    "star_product_exact",
    "star_product_integral",
    "weyl_symbol",
]
