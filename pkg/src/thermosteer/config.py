"""Numerical tolerances shared by the linear-algebra layer and the SDP solver."""
from dataclasses import dataclass, replace
from typing import Optional, TextIO

#: Boltzmann constant in eV/K.
KB_EV = 8.617333262e-5


@dataclass(frozen=True)
class NumericConfig:
    tol_herm: float = 1e-12
    tol_psd: float = 1e-9
    tol_eig: float = 1e-10
    # interior-point solver
    max_iters: int = 200
    gap_tol: float = 1e-10
    feas_tol: float = 1e-11
    step_fraction: float = 0.98
    infeasibility_ratio: float = 1e8
    stagnation_iters: int = 25
    trace: Optional[TextIO] = None
    # steering layer
    tol_member: float = 1e-7
    strategy_cap: int = 4096

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


DEFAULT = NumericConfig()
