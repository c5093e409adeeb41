"""Sign retrieval of real signals from Poisson-wavelet magnitudes on hyperbolic lattices."""

__version__ = "0.1.0"

from .errors import CapacityError, ConvergenceError, DomainError
from .signal import Signal, Spectrum, analytic_representation, dft, hilbert, idft
from .wavelets import WaveletSpec, cauchy, combo, hilbert_poisson, parse_wavelets, poisson
from .cwt import (CoefficientGrid, HyperbolicLattice, cwt_lattice, cwt_point, cwt_points,
                  default_lattice, density_report)
from .frames import (FrameSystem, analysis, frame_bounds_estimate, range_projection,
                     reconstruct, synthesis)
from .signret import (MagnitudeField, MeasurementVectors, SignField, SyncOptions,
                      complement_property, conjugate_counterexample, full_spark,
                      global_sign_sync, phase_distance, point_sign_retrieve, recover_signal)

__all__ = [
    "__version__", "CapacityError", "ConvergenceError", "DomainError",
    "Signal", "Spectrum", "analytic_representation", "dft", "hilbert", "idft",
    "WaveletSpec", "cauchy", "combo", "hilbert_poisson", "parse_wavelets", "poisson",
    "CoefficientGrid", "HyperbolicLattice", "cwt_lattice", "cwt_point", "cwt_points",
    "default_lattice", "density_report",
    "FrameSystem", "analysis", "frame_bounds_estimate", "range_projection", "reconstruct",
    "synthesis",
    "MagnitudeField", "MeasurementVectors", "SignField", "SyncOptions", "complement_property",
    "conjugate_counterexample", "full_spark", "global_sign_sync", "phase_distance",
    "point_sign_retrieve", "recover_signal",
]
