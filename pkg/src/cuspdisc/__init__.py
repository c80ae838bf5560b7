"""Analytic discs attached over cusped sectors: numerical experiments on propagation of holomorphic extension."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, ParameterError, RegularityError, UnsupportedOperation
from .funcpair import FunctionPair, Kind
from .sector import SectorSpec, sector_map
from .circle import BoundarySamples, CircleGrid, hilbert_T1, poisson_eval, radial_derivative_at_1
from .hypersurface import (CUTOFF, CutoffProfile, FiniteType, Holomorphic, InfDoubleExp, InfSingleExp,
                           RePart, TubeFailure, Zero, eval_h, sector_property)
from .bishop import AttachedDisc, BumpSpec, solve
from .levi import ConeBumpSpec, LeviReport, build_bump, finite_type_thresholds, laplacian_grid

__all__ = [
    "AttachedDisc", "BoundarySamples", "BumpSpec", "CUTOFF", "CircleGrid", "ConeBumpSpec",
    "ConvergenceError", "CutoffProfile", "DomainError", "FiniteType", "FunctionPair", "Holomorphic",
    "InfDoubleExp", "InfSingleExp", "Kind", "LeviReport", "ParameterError", "RePart", "RegularityError",
    "SectorSpec", "TubeFailure", "UnsupportedOperation", "Zero", "build_bump", "eval_h",
    "finite_type_thresholds", "hilbert_T1", "laplacian_grid", "poisson_eval", "radial_derivative_at_1",
    "sector_map", "sector_property", "solve",
]
