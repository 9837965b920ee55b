"""Work extraction figures of merit and witness-derived Hamiltonians.

Energies are in eV and temperatures in kelvin.  For a state ``rho`` and a
Hamiltonian ``H`` with Gibbs state ``gamma_H``:

* ``W_ext = kT ln2 * D_2(rho || gamma_H)`` (``D_2`` in bits),
* ``W_inf = W_ext`` evaluated at ``H = 0``,
* ``Delta = W_ext - W_inf = tr(H rho) + kT ln tr e^{-H/kT} - kT ln d``.

The four-batch figure of merit of an assemblage is
``Delta_bar = sum_{a,x} P(a,x) [Delta(sigma_hat_{a|x}) - Delta(gamma)]`` with
``P(a,x) = tr(sigma_{a|x}) / |x|`` and ``sigma_hat`` the normalised member.
"""
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .config import DEFAULT, KB_EV, NumericConfig
from .errors import DomainError, NoAdmissibleHamiltonian, NoAdvantage, NotSteerable, ValidationError
from .linalg import as_hermitian, herm
from .objects import PX, PZ, Assemblage, log_partition, mat_to_json, pauli_assemblage
from .sdp import SdpBuilder, solve_sdp
from .steering import enumerate_strategies, sr_gamma, sr_gamma_dual


def _kT(T, kB=KB_EV):
    T = float(T)
    if not np.isfinite(T) or T <= 0:
        raise DomainError("temperature must be finite and positive")
    return kB * T


def von_neumann_entropy(rho):
    """Entropy in nats; ``0 ln 0 = 0``."""
    w = np.linalg.eigvalsh(herm(np.asarray(rho, dtype=complex)))
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w)))


def work_ext(rho, H, T, kB=KB_EV):
    """Optimal extractable work ``kT D(rho || gamma_H)`` (relative entropy in nats)."""
    kT = _kT(T, kB)
    rho = as_hermitian(rho, tol=1e-10)
    H = as_hermitian(H, tol=1e-10)
    energy = float(np.real(np.trace(rho @ H)))
    return -kT * von_neumann_entropy(rho) + energy + kT * log_partition(H, kT)


def work_inf(rho, T, kB=KB_EV):
    d = np.asarray(rho).shape[0]
    return work_ext(rho, np.zeros((d, d)), T, kB)


def delta(rho, H, T, kB=KB_EV):
    """``tr(H rho) + kT ln tr e^{-H/kT} - kT ln d``."""
    kT = _kT(T, kB)
    H = as_hermitian(H, tol=1e-10)
    d = H.shape[0]
    return float(np.real(np.trace(H @ np.asarray(rho)))) + kT * log_partition(H, kT) - kT * math.log(d)


class HamiltonianFamily:
    """Hamiltonians ``H[x, a]`` (eV), one per outcome and setting."""

    def __init__(self, H):
        H = np.asarray(H, dtype=complex)
        if H.ndim != 4 or H.shape[2] != H.shape[3]:
            raise ValidationError("Hamiltonian family must have shape (n_x, n_a, d, d)")
        if not np.all(np.isfinite(H)):
            raise ValidationError("Hamiltonians must have finite entries")
        scale = max(1.0, float(np.max(np.abs(H))))
        if np.max(np.abs(H - np.swapaxes(H, -1, -2).conj())) > 1e-12 * scale:
            raise ValidationError("Hamiltonians must be Hermitian")
        self.H = herm(H)

    @property
    def n_settings(self):
        return self.H.shape[0]

    @property
    def n_outcomes(self):
        return self.H.shape[1]

    def scaled(self, c):
        return HamiltonianFamily(c * self.H)

    def to_json(self):
        return {f"{a}|{x}": mat_to_json(self.H[x, a])
                for x in range(self.n_settings) for a in range(self.n_outcomes)}


def pauli_hamiltonians(delta_, T, kB=KB_EV):
    """``H_{a|x} = kT delta (-1)^a O_x`` with ``O_0 = X`` and ``O_1 = Z``."""
    e = _kT(T, kB) * delta_
    return HamiltonianFamily(np.array([[e * PX, -e * PX], [e * PZ, -e * PZ]]))


@dataclass
class WorkReport:
    rows: List[dict]
    delta_bar: float
    delta_bar_linear: float
    residual: float
    eta: float
    in_H_eta: bool

    def to_json(self):
        return dict(self.__dict__)


def _check_support(sigma):
    if np.any(sigma.probs <= 0):
        raise DomainError("every assemblage member needs positive weight")


def _linear_delta_bar(sigma, gamma, fam_H):
    p = sigma.probs
    diff = sigma.sigma - p[:, :, None, None] * gamma[None, None]
    return float(np.real(np.einsum("xaij,xaji->", fam_H.H, diff))) / sigma.n_settings


def delta_bar(sigma: Assemblage, gamma, fam_H: HamiltonianFamily, T, eta=1e-3, kB=KB_EV):
    """Four-batch figure of merit, evaluated two ways and cross-checked."""
    _check_support(sigma)
    gamma = as_hermitian(gamma, tol=1e-10)
    kT = _kT(T, kB)
    p = sigma.probs
    n_x = sigma.n_settings
    rows = []
    total = 0.0
    scale = 0.0
    for x in range(n_x):
        for a in range(sigma.n_outcomes):
            H = fam_H.H[x, a]
            P = p[x, a] / n_x
            hat = sigma.sigma[x, a] / p[x, a]
            w_ext = work_ext(hat, H, T, kB)
            w_inf = work_inf(hat, T, kB)
            d_hat = delta(hat, H, T, kB)
            d_gam = delta(gamma, H, T, kB)
            total += P * (d_hat - d_gam)
            scale += P * (abs(d_hat) + abs(d_gam))
            rows.append({"a": a, "x": x, "P": float(P), "W_ext": w_ext, "W_inf": w_inf, "Delta": d_hat})
    lin = _linear_delta_bar(sigma, gamma, fam_H)
    residual = abs(total - lin)
    if residual > 1e-9 * max(scale, abs(lin), 1e-300):
        raise ValidationError(f"four-batch and linear forms disagree (residual {residual:.3e})")
    return WorkReport(rows, float(total), lin, float(residual), eta, bool(total >= kT * eta))


def _lhs_sigma_program(sigma, fam_H, cfg):
    """max sum tr(H tau) over LHS assemblages tau with sigma's statistics."""
    strat = enumerate_strategies(sigma.n_outcomes, sigma.n_settings, cfg.strategy_cap)
    d = sigma.dim
    D = strat.D
    scale = max(float(np.max(np.abs(fam_H.H))), 1e-300)
    G = np.einsum("ixa,xajk->ijk", D, fam_H.H) / scale
    sb = SdpBuilder()
    for i in range(strat.count):
        sb.add_block(i, d, objective=-G[i])
    p = sigma.probs
    for x in range(sigma.n_settings):
        for a in range(sigma.n_outcomes):
            sb.add_scalar_eq({i: np.eye(d) for i in range(strat.count) if D[i, x, a]}, p[x, a])
    sol = solve_sdp(sb.build(), cfg).require_optimal()
    etas = np.array(sol.X)
    tau = np.einsum("ixa,ijk->xajk", D, etas)
    return -sol.primal_obj * scale, tau


def max_delta_bar_lhs(sigma: Assemblage, gamma, fam_H: HamiltonianFamily, T,
                      cfg: NumericConfig = DEFAULT, return_maximiser=False):
    """``max Delta_bar(tau)`` over LHS assemblages ``tau`` sharing sigma's statistics."""
    _check_support(sigma)
    _kT(T)
    gamma = as_hermitian(gamma, tol=1e-10)
    if not np.any(fam_H.H):
        return (0.0, sigma.sigma * 0) if return_maximiser else 0.0
    best, tau = _lhs_sigma_program(sigma, fam_H, cfg)
    p = sigma.probs
    ref = float(np.real(np.einsum("xaij,ji->xa", fam_H.H, gamma)).ravel() @ p.ravel())
    value = (best - ref) / sigma.n_settings
    return (value, tau) if return_maximiser else value


def total_work_deficit(tau, fam_H: HamiltonianFamily, T, kB=KB_EV):
    """``sum_{a,x} tr(tau_{a|x}) Delta(tau_hat_{a|x})`` for an assemblage array."""
    tau = np.asarray(tau)
    out = 0.0
    for x in range(tau.shape[0]):
        for a in range(tau.shape[1]):
            p = float(np.real(np.trace(tau[x, a])))
            if p > 0:
                out += p * delta(tau[x, a] / p, fam_H.H[x, a], T, kB)
    return out


@dataclass
class Certificate:
    hamiltonians: HamiltonianFamily
    quantum: float  # Delta_bar(sigma, H)
    classical: float  # max over LHS(sigma)
    gap: float

    @property
    def ratio(self):
        return self.quantum / self.classical

    def to_json(self):
        return {"hamiltonians": self.hamiltonians.to_json(), "quantum": self.quantum,
                "classical": self.classical, "gap": self.gap, "ratio": self.ratio}


def certificate_hamiltonians(sigma: Assemblage, gamma, T, cfg: NumericConfig = DEFAULT,
                             kB=KB_EV) -> Certificate:
    """Hamiltonians ``H_{a|x} = -kT |x| Y_{a|x}`` built from the optimal witness.

    Both sides of the advantage are evaluated with separate solves; raises
    :class:`NoAdvantage` when the witness certifies nothing.
    """
    kT = _kT(T, kB)
    wit = sr_gamma_dual(sigma, gamma, cfg)
    if wit.value >= 1 - cfg.tol_member:
        raise NoAdvantage("assemblage admits an LHS model; no witness beats the thermal reference")
    fam = HamiltonianFamily(-kT * sigma.n_settings * wit.Y)
    quantum = delta_bar(sigma, gamma, fam, T, kB=kB).delta_bar
    classical = max_delta_bar_lhs(sigma, gamma, fam, T, cfg)
    gap = quantum - classical
    if gap <= 1e-7 * kT:
        raise NoAdvantage(f"certificate gap {gap:.3e} eV is not strictly positive")
    return Certificate(fam, quantum, classical, gap)


def sr_from_work(sigma: Assemblage, gamma, candidates, eta=1e-3, T=300.0,
                 cfg: NumericConfig = DEFAULT, kB=KB_EV):
    """Best work-advantage ratio over admitted candidate Hamiltonian families.

    A candidate is admitted when its figure of merit is at least ``kT eta``.
    Returns ``(ratio, family)``.
    """
    kT = _kT(T, kB)
    if sr_gamma(sigma, gamma, cfg).sr <= cfg.tol_member:
        raise NotSteerable("assemblage admits an LHS model")
    best, arg = -np.inf, None
    for fam in candidates:
        q = delta_bar(sigma, gamma, fam, T, eta, kB).delta_bar
        if q < kT * eta:
            continue
        c = max_delta_bar_lhs(sigma, gamma, fam, T, cfg)
        ratio = q / c if c > 0 else np.inf
        if ratio > best:
            best, arg = ratio, fam
    if arg is None:
        raise NoAdmissibleHamiltonian(f"no candidate reaches Delta_bar >= kT * {eta:g}")
    return float(best), arg


def tmin_from_work(sigma: Assemblage, gamma, t0, T, certificate: Optional[Certificate] = None,
                   cfg: NumericConfig = DEFAULT):
    """Survival time under ``h(t) = exp(-t/t0)`` read off a work advantage: ``t0 ln(ratio)``."""
    cert = certificate_hamiltonians(sigma, gamma, T, cfg) if certificate is None else certificate
    return t0 * math.log(cert.ratio)


# --------------------------------------------------------------------------
# the X/Z qubit example


def pauli_bounds(delta_, T, kB=KB_EV):
    """Closed-form totals for the X/Z example: ``(classical, quantum)`` in eV."""
    kT = _kT(T, kB)
    lc = math.log(math.cosh(delta_))
    return kT * (math.sqrt(2) * delta_ + 2 * lc), 2 * kT * (delta_ + lc)


def pauli_example(delta_, T, cfg: NumericConfig = DEFAULT, kB=KB_EV):
    """Evaluate the X/Z example at one ``delta``: closed forms against the SDP."""
    kT = _kT(T, kB)
    sigma = pauli_assemblage()
    gamma = sigma.reduced
    fam = pauli_hamiltonians(delta_, T, kB)
    q = delta_bar(sigma, gamma, fam, T, kB=kB).delta_bar
    c, tau = max_delta_bar_lhs(sigma, gamma, fam, T, cfg, return_maximiser=True)
    cb, qv = pauli_bounds(delta_, T, kB)
    sr = sr_gamma(sigma, gamma, cfg).sr
    return {
        "delta": delta_,
        "kT_delta": kT * delta_,
        "classical_bound": cb,
        "quantum_value": qv,
        "classical_sdp": total_work_deficit(tau, fam, T, kB),
        "quantum_direct": total_work_deficit(sigma.sigma, fam, T, kB),
        "delta_bar": q,
        "delta_bar_lhs_max": c,
        "ratio": q / c,
        "sr": float(sr),
        "t_min_over_t0": math.log(q / c),
    }
