"""Local-hidden-state models and the thermalisation steering robustness.

An assemblage is LHS when ``sigma_{a|x} = sum_i D(a|x,i) eta_i`` for PSD
``eta_i`` and the deterministic strategies ``D``.  The robustness asks how
much of ``sigma`` survives when mixed with the flat assemblage
``{p_{a|x} gamma}`` before an LHS model exists::

    2^{-SR} = max q   s.t.  sum_i D(a|x,i) eta_i = q sigma_{a|x} + (1-q) p_{a|x} gamma
                            eta_i >= 0,  0 <= q <= 1
"""
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .config import DEFAULT, NumericConfig
from .errors import CapacityError, DomainError, SolverError
from .linalg import as_hermitian, hermitian_basis, min_eigenvalue
from .objects import Assemblage, mat_from_json, mat_to_json
from .sdp import SdpBuilder, SdpProblem, Status, scaled, solve_sdp, times_matrix


@dataclass(frozen=True)
class StrategySet:
    n_outcomes: int
    n_settings: int
    strategies: np.ndarray  # (count, n_settings): strategy i answers a = strategies[i, x]

    @property
    def count(self):
        return len(self.strategies)

    @property
    def D(self):
        """Indicator array ``D[i, x, a]``."""
        return (self.strategies[:, :, None] == np.arange(self.n_outcomes)[None, None, :]).astype(float)


def enumerate_strategies(n_outcomes, n_settings, cap=DEFAULT.strategy_cap):
    """All ``n_outcomes ** n_settings`` deterministic strategies in lexicographic order."""
    if n_outcomes < 1 or n_settings < 1:
        raise DomainError("need at least one outcome and one setting")
    count = n_outcomes ** n_settings
    if count > cap:
        raise CapacityError(f"{count} deterministic strategies exceed the cap of {cap}")
    strat = np.array(list(itertools.product(range(n_outcomes), repeat=n_settings)), dtype=int)
    return StrategySet(n_outcomes, n_settings, strat.reshape(count, n_settings))


@dataclass
class LhsModel:
    etas: np.ndarray  # (count, d, d)
    strategies: StrategySet

    def assemblage_array(self):
        return np.einsum("ixa,ijk->xajk", self.strategies.D, self.etas)

    def to_json(self):
        return {"strategies": self.strategies.strategies.tolist(),
                "etas": [mat_to_json(e) for e in self.etas]}


@dataclass
class SteeringWitness:
    Y: np.ndarray  # (n_settings, n_outcomes, d, d)
    omega: float
    value: float

    def strategy_operators(self, strategies):
        return np.einsum("ixa,xajk->ijk", strategies.D, self.Y)

    def min_eigenvalue(self, strategies):
        return min(min_eigenvalue(m) for m in self.strategy_operators(strategies))

    def to_json(self):
        return {"omega": self.omega, "value": self.value,
                "Y": {f"{a}|{x}": mat_to_json(self.Y[x, a])
                      for x in range(self.Y.shape[0]) for a in range(self.Y.shape[1])}}


class SrResult(NamedTuple):
    sr: float
    q_star: float
    model: LhsModel


@dataclass
class Membership:
    member: bool
    model: Optional[LhsModel]
    margin: float


def _check_gamma(gamma, d):
    gamma = as_hermitian(gamma, tol=1e-10)
    if gamma.shape != (d, d):
        raise DomainError(f"reference state has shape {gamma.shape}, expected {(d, d)}")
    if abs(np.trace(gamma).real - 1) > 1e-9:
        raise DomainError("reference state must have unit trace")
    if min_eigenvalue(gamma) <= 0:
        raise DomainError("reference state must be full rank")
    return gamma


def _sr_builder(sigma: Assemblage, gamma, strat):
    """SDP variables ``q``, ``s = 1 - q`` and ``eta_i``; objective ``-q``."""
    d = sigma.dim
    p = sigma.probs
    sb = SdpBuilder()
    sb.add_block("q", 1, objective=[[-1.0]])
    sb.add_block("s", 1)
    for i in range(strat.count):
        sb.add_block(("eta", i), d)
    sb.add_scalar_eq({"q": [[1.0]], "s": [[1.0]]}, 1.0)
    D = strat.D
    for x in range(sigma.n_settings):
        for a in range(sigma.n_outcomes):
            target = p[x, a] * gamma
            terms = {("eta", i): scaled(1.0) for i in range(strat.count) if D[i, x, a]}
            terms["q"] = times_matrix(target - sigma.sigma[x, a])
            sb.add_matrix_eq(d, terms, target)
    return sb


def sr_gamma(sigma: Assemblage, gamma=None, cfg: NumericConfig = DEFAULT) -> SrResult:
    """Thermalisation steering robustness of ``sigma`` relative to ``gamma``.

    ``gamma`` defaults to the reduced state of ``sigma``.  Returns
    ``(sr, q_star, model)`` where ``model`` is an LHS model for the mixture
    at ``q_star = 2^{-sr}``.
    """
    gamma = _check_gamma(sigma.reduced if gamma is None else gamma, sigma.dim)
    strat = enumerate_strategies(sigma.n_outcomes, sigma.n_settings, cfg.strategy_cap)
    sb = _sr_builder(sigma, gamma, strat)
    sol = solve_sdp(sb.build(), cfg)
    if not sol.ok:
        raise SolverError(sol.status.value)
    q = float(np.clip(-sol.primal_obj, 1e-300, 1.0))
    etas = np.array([sb.block(sol, ("eta", i)) for i in range(strat.count)])
    sr = max(0.0, float(-np.log2(q)))
    return SrResult(sr, q, LhsModel(etas, strat))


def sr_gamma_dual(sigma: Assemblage, gamma=None, cfg: NumericConfig = DEFAULT) -> SteeringWitness:
    """Optimal steering witness from the dual program.

    The dual is posed directly in the solver's dual form (free variables
    ``Y_{a|x}``, ``omega``; one LMI per strategy), so its optimum is computed
    independently of :func:`sr_gamma`::

        min  sum tr(Y_{a|x} gamma) p_{a|x} + omega
        s.t. sum_{a,x} D(a|x,i) Y_{a|x} >= 0   for every i
             sum tr(Y gamma) p + omega >= sum tr(Y sigma) + 1,  omega >= 0
    """
    gamma = _check_gamma(sigma.reduced if gamma is None else gamma, sigma.dim)
    strat = enumerate_strategies(sigma.n_outcomes, sigma.n_settings, cfg.strategy_cap)
    d, n_x, n_a = sigma.dim, sigma.n_settings, sigma.n_outcomes
    p = sigma.probs
    E = hermitian_basis(d)
    D = strat.D
    # LMI blocks: one per strategy, then omega >= 0, then the normalisation row
    blocks = [d] * strat.count + [1, 1]
    C = [np.zeros((d, d))] * strat.count + [np.zeros((1, 1)), -np.ones((1, 1))]
    cons = []
    for x in range(n_x):
        for a in range(n_a):
            for e in E:
                A = [-D[i, x, a] * e if D[i, x, a] else None for i in range(strat.count)]
                coef = np.real(np.trace(e @ gamma)) * p[x, a] - np.real(np.trace(e @ sigma.sigma[x, a]))
                A += [None, np.array([[-coef]])]
                cons.append((A, -np.real(np.trace(e @ gamma)) * p[x, a]))
    cons.append(([None] * strat.count + [-np.ones((1, 1)), -np.ones((1, 1))], -1.0))
    sol = solve_sdp(SdpProblem(blocks, C, cons), cfg)
    if not sol.ok:
        raise SolverError(sol.status.value)
    coords = sol.y[:-1].reshape(n_x, n_a, d * d)
    Y = np.einsum("xak,kij->xaij", coords, E)
    omega = float(sol.y[-1])
    value = float(np.einsum("xaij,ji->xa", Y, gamma).real.ravel() @ p.ravel()) + omega
    return SteeringWitness(Y, omega, value)


def lhs_feasibility(sigma: Assemblage, match_statistics=False, cfg: NumericConfig = DEFAULT):
    """Try to decompose ``sigma`` exactly over deterministic strategies.

    Returns an :class:`LhsModel` or ``None`` when the solver finds none.
    """
    strat = enumerate_strategies(sigma.n_outcomes, sigma.n_settings, cfg.strategy_cap)
    d = sigma.dim
    sb = SdpBuilder()
    for i in range(strat.count):
        sb.add_block(i, d)
    D = strat.D
    for x in range(sigma.n_settings):
        for a in range(sigma.n_outcomes):
            idx = [i for i in range(strat.count) if D[i, x, a]]
            sb.add_matrix_eq(d, {i: scaled(1.0) for i in idx}, sigma.sigma[x, a])
            if match_statistics:
                sb.add_scalar_eq({i: np.eye(d) for i in idx}, sigma.probs[x, a])
    sol = solve_sdp(sb.build(), cfg)
    if sol.status is not Status.OPTIMAL:
        return None
    return LhsModel(np.array(sol.X), strat)


def lhs_membership(sigma: Assemblage, gamma=None, match_statistics=False,
                   cfg: NumericConfig = DEFAULT) -> Membership:
    """Decide whether ``sigma`` admits an LHS model.

    Membership follows the robustness: ``sigma`` is a member iff
    ``sr <= cfg.tol_member``.  Members carry an explicit model; non-members
    report the margin ``1 - 2^{-sr}``.
    """
    res = sr_gamma(sigma, gamma, cfg)
    if res.sr > cfg.tol_member:
        return Membership(False, None, 1.0 - res.q_star)
    model = lhs_feasibility(sigma, match_statistics, cfg)
    if model is None or Assemblage(model.assemblage_array(), validate=False).distance(sigma) > 1e-7:
        model = res.model
    return Membership(True, model, 0.0)


def witness_from_json(obj):
    Ys = {tuple(int(t) for t in k.split("|")): mat_from_json(v) for k, v in obj["Y"].items()}
    n_a = 1 + max(a for a, _ in Ys)
    n_x = 1 + max(x for _, x in Ys)
    Y = np.array([[Ys[(a, x)] for a in range(n_a)] for x in range(n_x)])
    return SteeringWitness(Y, float(obj["omega"]), float(obj["value"]))
