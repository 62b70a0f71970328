"""Inversion of Toeplitz-block-Toeplitz matrices from the 2m x 2n matrix g12."""

from .extraction import GPair, extract_g
from .reconstruction import GridConfig, recover_r
from .symbol import TbtSymbol, assemble, project_tbt, random_symbol
from .theta import theta_poly
from .verify import ReconstructionReport, Tolerances, characterize, invariant_suite, roundtrip

__all__ = [
    "GPair",
    "GridConfig",
    "ReconstructionReport",
    "TbtSymbol",
    "Tolerances",
    "assemble",
    "characterize",
    "extract_g",
    "invariant_suite",
    "project_tbt",
    "random_symbol",
    "recover_r",
    "roundtrip",
    "theta_poly",
]
