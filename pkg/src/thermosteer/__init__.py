"""Thermodynamic quantification of instrument incompatibility via steering."""
from .config import DEFAULT, KB_EV, NumericConfig
from .errors import (CapacityError, ConditionViolated, DomainError, Inconclusive,
                     NoAdmissibleHamiltonian, NoAdvantage, NotSteerable, NumericalFailure,
                     ShapeError, SolverError, ThermosteerError, ValidationError,
                     ZeroSuccessProbability)
from .objects import (Assemblage, Channel, InstrumentFamily, ThermalContext, apply_instrument,
                      choi_of_map, extend_with_ancilla, flat_assemblage, is_gibbs_preserving,
                      isotropic_state, map_of_choi, pauli_assemblage, pauli_xz_family,
                      thermal_state, xz_measure_prepare)
from .sdp import SdpBuilder, SdpProblem, SdpSolution, Status, diamond_norm, solve_sdp
from .steering import enumerate_strategies, lhs_membership, sr_gamma, sr_gamma_dual
from .thermo import Schedule, davies_map, find_t_star, t_min, thermalise
from .work import (HamiltonianFamily, certificate_hamiltonians, delta, delta_bar,
                   max_delta_bar_lhs, sr_from_work, work_ext, work_inf)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT", "KB_EV", "NumericConfig", "Assemblage", "Channel", "InstrumentFamily",
    "ThermalContext", "apply_instrument", "choi_of_map", "extend_with_ancilla",
    "flat_assemblage", "is_gibbs_preserving", "isotropic_state", "map_of_choi",
    "pauli_assemblage", "pauli_xz_family", "thermal_state", "xz_measure_prepare", "SdpBuilder",
    "SdpProblem", "SdpSolution", "Status", "diamond_norm", "solve_sdp", "enumerate_strategies",
    "lhs_membership", "sr_gamma", "sr_gamma_dual", "Schedule", "davies_map", "find_t_star",
    "t_min", "thermalise", "HamiltonianFamily", "certificate_hamiltonians", "delta",
    "delta_bar", "max_delta_bar_lhs", "sr_from_work", "work_ext", "work_inf",
    "CapacityError", "ConditionViolated", "DomainError", "Inconclusive",
    "NoAdmissibleHamiltonian", "NoAdvantage", "NotSteerable", "NumericalFailure", "ShapeError",
    "SolverError", "ThermosteerError", "ValidationError", "ZeroSuccessProbability",
]
