from .energy import EnergyReport, directional_derivative, energy, energy_from_samples, first_variation
from .farfield import FarField, farfield_eval, final_time_profile, recover_C0, tail_slope
from .gluing import glue_guess, plus_2k_guess
from .guess import InitialProfile, default_guess
from .multiindex import InterfaceEstimate, classify, interface_estimate
from .shooting import F_STAR_PEAK, SpatialOrbit, periodic_spatial
from .solve import annotate, solve_profile
from .system import ProfileProblemSpec, RhsCoefficients, build_system, default_radius, normalizing_scale

__all__ = [
    "EnergyReport", "F_STAR_PEAK", "FarField", "InitialProfile", "InterfaceEstimate", "ProfileProblemSpec",
    "RhsCoefficients", "SpatialOrbit", "annotate", "build_system", "classify", "default_guess",
    "default_radius", "directional_derivative", "energy", "energy_from_samples", "farfield_eval",
    "final_time_profile", "first_variation", "glue_guess", "interface_estimate", "normalizing_scale",
    "periodic_spatial", "plus_2k_guess", "recover_C0", "solve_profile", "tail_slope",
]
