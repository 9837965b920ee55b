"""Free operations of the resource theory and monotonicity audits.

Deterministic allowed operations (DAOs) wrap an instrument family between a
Gibbs-preserving pre-channel ``P`` and post-channel ``Q`` and reshuffle the
classical labels::

    F(E)_{a|x} = sum_{y,b} P'(a|x,y,b) P(y|x)  Q o E_{b|y} o P

LF1 filters are single-Kraus stochastic maps ``rho -> K rho K^dagger / p``.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .config import DEFAULT, NumericConfig
from .errors import ConditionViolated, ShapeError, ValidationError, ZeroSuccessProbability
from .linalg import herm, random_unitary, trace_norm
from .objects import (Assemblage, Channel, InstrumentFamily, apply_instrument, compose,
                      identity_channel, is_gibbs_preserving, replacement_channel, unitary_channel)
from .steering import sr_gamma
from .thermo import Schedule, t_min_from_sr


@dataclass
class DAO:
    """A deterministic allowed operation.

    ``pre[x, y] = P(y|x)`` and ``post[x, y, b, a] = P'(a|x,y,b)``; the family
    it acts on has settings ``y`` and outcomes ``b``.
    """

    pre: np.ndarray
    post: np.ndarray
    pre_channel: Channel
    post_channel: Channel

    def __post_init__(self):
        self.pre = np.asarray(self.pre, dtype=float)
        self.post = np.asarray(self.post, dtype=float)
        n_x, n_y = self.pre.shape
        if self.post.ndim != 4 or self.post.shape[:2] != (n_x, n_y):
            raise ShapeError("post-processing must have shape (n_x, n_y, n_b, n_a)")
        for name, arr in (("pre", self.pre), ("post", self.post)):
            if np.any(arr < -1e-12) or np.max(np.abs(arr.sum(axis=-1) - 1)) > 1e-10:
                raise ValidationError(f"{name}-processing is not a conditional distribution")
        if not (self.pre_channel.is_tp and self.post_channel.is_tp):
            raise ValidationError("DAO channels must be trace-preserving")

    @property
    def shape(self):
        """``(n_x, n_y, n_b, n_a)``."""
        return self.post.shape

    def check_gibbs(self, gamma):
        for name, ch in (("pre", self.pre_channel), ("post", self.post_channel)):
            ok, res = is_gibbs_preserving(ch, gamma)
            if not ok:
                raise ValidationError(f"{name}-channel is not Gibbs-preserving (residual {res:.3e})")


def identity_dao(n_outcomes, n_settings, d):
    pre = np.eye(n_settings)
    post = np.zeros((n_settings, n_settings, n_outcomes, n_outcomes))
    for x in range(n_settings):
        post[x, x] = np.eye(n_outcomes)
        for y in range(n_settings):
            if y != x:
                post[x, y] = np.full((n_outcomes, n_outcomes), 1.0 / n_outcomes)
    ident = identity_channel(d)
    return DAO(pre, post, ident, ident)


def relabel_dao(perms, d):
    """Outcome permutation per setting: ``a = perms[x][b]``."""
    n_x, n_a = len(perms), len(perms[0])
    op = identity_dao(n_a, n_x, d)
    post = op.post.copy()
    for x, perm in enumerate(perms):
        post[x, x] = np.eye(n_a)[list(perm)]
    return DAO(op.pre, post, op.pre_channel, op.post_channel)


def apply_dao(op: DAO, fam: InstrumentFamily, gamma) -> InstrumentFamily:
    op.check_gibbs(gamma)
    n_x, n_y, n_b, n_a = op.shape
    if (n_y, n_b) != (fam.n_settings, fam.n_outcomes):
        raise ShapeError("DAO classical maps do not match the family's labels")
    sandwiched = {k: compose(op.post_channel, compose(ch, op.pre_channel))
                  for k, ch in fam.filters.items()}
    d_in, d_out = op.pre_channel.d_in, op.post_channel.d_out
    filters = {}
    for x in range(n_x):
        for a in range(n_a):
            J = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
            for y in range(n_y):
                if op.pre[x, y] == 0:
                    continue
                for b in range(n_b):
                    w = op.post[x, y, b, a] * op.pre[x, y]
                    if w:
                        J = J + w * sandwiched[(b, y)].choi
            filters[(a, x)] = Channel(J, d_in, d_out)
    return InstrumentFamily(filters, n_a, n_x)


def compose_dao(op2: DAO, op1: DAO) -> DAO:
    """The DAO equal to applying ``op1`` and then ``op2``."""
    n_x, n_z, n_c, n_a = op2.shape  # op2 acts on op1's output (settings z, outcomes c)
    m_z, n_y, n_b, m_c = op1.shape
    if (m_z, m_c) != (n_z, n_c):
        raise ShapeError("DAO label sets do not chain")
    P = op2.pre @ op1.pre  # P(y|x) = sum_z P1(y|z) P2(z|x)
    # weight[x, y, b, a] = sum_{z,c} P2'(a|x,z,c) P2(z|x) P1'(c|z,y,b) P1(y|z)
    W = np.einsum("xzca,xz,zybc,zy->xyba", op2.post, op2.pre, op1.post, op1.pre)
    post = np.empty_like(W)
    for x in range(n_x):
        for y in range(n_y):
            if P[x, y] > 1e-15:
                post[x, y] = W[x, y] / P[x, y]
            else:
                post[x, y] = 1.0 / n_a
    return DAO(P, post, compose(op1.pre_channel, op2.pre_channel),
               compose(op2.post_channel, op1.post_channel))


def gamma_commuting_unitary(gamma, rng):
    """Random unitary acting independently inside each eigenspace of ``gamma``."""
    w, v = np.linalg.eigh(herm(np.asarray(gamma, dtype=complex)))
    U = np.zeros((len(w), len(w)), dtype=complex)
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) <= 1e-12:
            stop += 1
        U[start:stop, start:stop] = random_unitary(stop - start, rng)
        start = stop
    return v @ U @ v.conj().T


def random_gibbs_preserving(gamma, rng, n_unitaries=2):
    """Convex mixture of gamma-fixing unitary channels and ``rho -> gamma tr(rho)``."""
    weights = rng.dirichlet(np.ones(n_unitaries + 1))
    d = gamma.shape[0]
    J = weights[-1] * replacement_channel(gamma).choi
    for wk in weights[:-1]:
        J = J + wk * unitary_channel(gamma_commuting_unitary(gamma, rng)).choi
    return Channel(J, d, d)


def random_dao(n_outcomes, n_settings, gamma, rng, deterministic_fraction=0.3):
    """Random DAO that keeps the label sets fixed."""

    def kernel(shape, k):
        if rng.random() < deterministic_fraction:
            out = np.zeros(shape + (k,))
            idx = rng.integers(k, size=shape)
            np.put_along_axis(out, idx[..., None], 1.0, axis=-1)
            return out
        return rng.dirichlet(np.ones(k), size=shape)

    pre = kernel((n_settings,), n_settings)
    post = kernel((n_settings, n_settings, n_outcomes), n_outcomes)
    return DAO(pre, post, random_gibbs_preserving(gamma, rng), random_gibbs_preserving(gamma, rng))


# --------------------------------------------------------------------------
# LF1 filters


@dataclass
class Lf1Filter:
    K: np.ndarray

    def __post_init__(self):
        self.K = np.atleast_2d(np.asarray(self.K, dtype=complex))
        top = np.linalg.eigvalsh(herm(self.K.conj().T @ self.K))[-1]
        if top > 1 + 1e-10:
            raise ValidationError(f"K^dagger K exceeds the identity (largest eigenvalue {top:.6g})")

    def success_probability(self, gamma):
        return float(np.real(np.trace(self.K @ gamma @ self.K.conj().T)))

    def then(self, other):
        """Filter ``other`` applied after ``self``."""
        return Lf1Filter(other.K @ self.K)


def lf1_residuals(f: Lf1Filter, sigma: Assemblage, gamma):
    """``(p_gamma, residual_i, residual_ii)`` for the given input."""
    p = f.success_probability(gamma)
    if p <= 1e-15:
        raise ZeroSuccessProbability("filter annihilates the thermal state")
    K = f.K
    after = np.real(np.einsum("ij,xajk,lk->xail", K, sigma.sigma, K.conj()).trace(axis1=2, axis2=3)) / p
    res_i = float(np.max(np.abs(after - sigma.probs)))
    res_ii = trace_norm(herm(K @ gamma @ K.conj().T / p - gamma))
    return p, res_i, res_ii


def apply_lf1(f: Lf1Filter, sigma: Assemblage, gamma, enforce_conditions=True) -> Assemblage:
    """``omega_{a|x} = K sigma_{a|x} K^dagger / p_gamma``.

    With ``enforce_conditions`` the filter must keep the thermal state and
    the classical statistics of this particular ``sigma``; otherwise
    :class:`ConditionViolated` is raised.
    """
    p, res_i, res_ii = lf1_residuals(f, sigma, gamma)
    if enforce_conditions:
        if res_ii > 1e-9:
            raise ConditionViolated("ii", res_ii)
        if res_i > 1e-8:
            raise ConditionViolated("i", res_i)
    K = f.K
    out = np.einsum("ij,xajk,lk->xail", K, sigma.sigma, K.conj()) / p
    return Assemblage(out, validate=False)


def random_lf1(gamma, rng):
    """``sqrt(p) U`` with ``U`` commuting with ``gamma``; satisfies both conditions."""
    p = rng.uniform(0.05, 1.0)
    return Lf1Filter(np.sqrt(p) * gamma_commuting_unitary(gamma, rng))


# --------------------------------------------------------------------------
# audits


@dataclass
class AuditRow:
    kind: str
    index: int
    sr_before: float
    sr_after: float
    t_min_before: float
    t_min_after: float
    passed: bool
    certified: bool = True

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class AuditReport:
    rows: List[AuditRow] = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.rows if r.certified)

    def to_json(self):
        return {"passed": self.passed, "rows": [r.to_json() for r in self.rows]}

    def table(self):
        lines = [f"{'kind':<6} {'#':>4} {'sr before':>12} {'sr after':>12} "
                 f"{'tmin before':>12} {'tmin after':>12}  result"]
        for r in self.rows:
            flag = "PASS" if r.passed else "FAIL"
            if not r.certified:
                flag += " (non-certified)"
            lines.append(f"{r.kind:<6} {r.index:>4} {r.sr_before:>12.6g} {r.sr_after:>12.6g} "
                         f"{r.t_min_before:>12.6g} {r.t_min_after:>12.6g}  {flag}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def monotone_audit(fam: InstrumentFamily, gamma, sched: Schedule, ops=(), filters=(),
                   permissive=False, tol=1e-6, cfg: NumericConfig = DEFAULT) -> AuditReport:
    """Check that SR and t_min never grow under the given free operations.

    All operations are validated up front; a non-Gibbs-preserving DAO raises
    :class:`ValidationError` before anything is solved.  Filters violating
    their conditions raise too unless ``permissive`` is set, in which case
    they are applied and their rows marked non-certified.
    """
    for op in ops:
        op.check_gibbs(gamma)
    sigma = apply_instrument(fam, gamma)
    sr0 = sr_gamma(sigma, gamma, cfg).sr
    t0 = t_min_from_sr(sr0, sched, cfg.tol_member)
    report = AuditReport()

    def row(kind, k, sr1, certified=True):
        t1 = t_min_from_sr(sr1, sched, cfg.tol_member)
        ok = sr1 <= sr0 + tol and t1 <= t0 + tol
        report.rows.append(AuditRow(kind, k, sr0, sr1, t0, t1, ok, certified))

    for k, op in enumerate(ops):
        out = apply_dao(op, fam, gamma)
        row("dao", k, sr_gamma(apply_instrument(out, gamma), gamma, cfg).sr)
    for k, f in enumerate(filters):
        certified = True
        try:
            omega = apply_lf1(f, sigma, gamma, enforce_conditions=True)
        except ConditionViolated:
            if not permissive:
                raise
            certified = False
            omega = apply_lf1(f, sigma, gamma, enforce_conditions=False)
        row("lf1", k, sr_gamma(omega, gamma, cfg).sr, certified)
    return report
