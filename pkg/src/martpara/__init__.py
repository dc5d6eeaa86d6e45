"""Martingale paraproducts, Hardy-type norms and dyadic systems on finite spaces."""

from .atomic import SimpleAtom, stopping_time_constant, stopping_time_decomposition, validate_simple_atom
from .dyadic_geometry import (
    AdjacentSystems,
    DyadicSystem,
    QuasiMetricSpace,
    build_adjacent_systems,
    build_dyadic_system,
    cover_ball,
    euclidean_shifted_grids,
    verify_system,
)
from .function_norms import PHI, MusielakFunction, NormVariant, bmo_norm, hardy_norm, lipschitz_norm, luxembourg_norm, norm
from .martingale_ops import expand, paraproducts
from .measure_space import Filtration, MeasureSpace, validate_filtration

__all__ = [
    "PHI",
    "AdjacentSystems",
    "DyadicSystem",
    "Filtration",
    "MeasureSpace",
    "MusielakFunction",
    "NormVariant",
    "QuasiMetricSpace",
    "SimpleAtom",
    "bmo_norm",
    "build_adjacent_systems",
    "build_dyadic_system",
    "cover_ball",
    "euclidean_shifted_grids",
    "expand",
    "hardy_norm",
    "lipschitz_norm",
    "luxembourg_norm",
    "norm",
    "paraproducts",
    "stopping_time_constant",
    "stopping_time_decomposition",
    "validate_filtration",
    "validate_simple_atom",
    "verify_system",
]
