"""Primal-dual interior-point solver for small Hermitian block SDPs.

Standard form::

    minimise    sum_j tr(C_j X_j)
    subject to  sum_j tr(A_kj X_j) = b_k      for every constraint k
                X_j >= 0                      for every block j

with dual ``maximise b.y  s.t.  S_j = C_j - sum_k y_k A_kj >= 0``.

The search direction is HKM with a Mehrotra predictor-corrector.  Blocks of
equal size are stacked so the per-iteration work is a few batched numpy
calls.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np
import scipy.linalg

from .config import DEFAULT, NumericConfig
from .errors import NumericalFailure, ShapeError, SolverError, ValidationError
from .linalg import herm, hermitian_basis, hermiticity_error, partial_trace


class Status(str, Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SdpProblem:
    """Block SDP in equality standard form (minimisation).

    ``constraints`` is a list of ``(A_list, b)`` pairs; ``A_list[j]`` may be
    ``None`` when the constraint does not touch block ``j``.
    """

    blocks: List[int]
    C: List[np.ndarray]
    constraints: List[tuple] = field(default_factory=list)

    def __post_init__(self):
        self.blocks = [int(d) for d in self.blocks]
        if any(d < 1 for d in self.blocks):
            raise ShapeError("block dimensions must be positive")
        if len(self.C) != len(self.blocks):
            raise ShapeError("one objective matrix per block is required")
        self.C = [_check_block(c, d, "objective") for c, d in zip(self.C, self.blocks)]
        checked = []
        for k, (A, b) in enumerate(self.constraints):
            if len(A) != len(self.blocks):
                raise ShapeError(f"constraint {k} has {len(A)} blocks, expected {len(self.blocks)}")
            A = [None if a is None else _check_block(a, d, f"constraint {k}")
                 for a, d in zip(A, self.blocks)]
            checked.append((A, float(b)))
        self.constraints = checked

    @property
    def n_constraints(self):
        return len(self.constraints)


def _check_block(m, d, what):
    m = np.asarray(m, dtype=complex)
    if m.shape != (d, d):
        raise ShapeError(f"{what}: block of shape {m.shape}, expected {(d, d)}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if hermiticity_error(m) > DEFAULT.tol_herm * scale:
        raise ValidationError(f"{what}: block is not Hermitian")
    return herm(m)


@dataclass
class SdpSolution:
    X: List[np.ndarray]
    y: np.ndarray
    S: List[np.ndarray]
    primal_obj: float
    dual_obj: float
    gap: float
    status: Status
    iterations: int = 0
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")

    @property
    def ok(self):
        return self.status is Status.OPTIMAL

    def require_optimal(self):
        if not self.ok:
            raise SolverError(self.status.value)
        return self


class _Packed:
    """Constraint data stacked by block size.

    For each group ``g`` of equal-size blocks the constraint matrices are kept
    as a real view of shape ``(m, 2*n*d*d)`` so that ``tr(A_k X)`` becomes a
    single real matrix-vector product.
    """

    def __init__(self, prob):
        self.blocks = prob.blocks
        by = {}
        for j, d in enumerate(prob.blocks):
            by.setdefault(d, []).append(j)
        self.groups = sorted(by.items())
        m = prob.n_constraints
        self.C = []
        self.A = []
        for d, idx in self.groups:
            self.C.append(np.stack([prob.C[j] for j in idx]))
            a = np.zeros((m, len(idx), d, d), dtype=complex)
            for k, (Ak, _) in enumerate(prob.constraints):
                for t, j in enumerate(idx):
                    if Ak[j] is not None:
                        a[k, t] = Ak[j]
            self.A.append(a)
        self.b = np.array([b for _, b in prob.constraints], dtype=float)

    def real_rows(self):
        return np.hstack([_rview(a, a.shape[0]) for a in self.A]) if self.A else np.zeros((0, 0))

    def unpack(self, stacks):
        out = [None] * len(self.blocks)
        for (d, idx), s in zip(self.groups, stacks):
            for t, j in enumerate(idx):
                out[j] = s[t].copy()
        return out


def _rview(a, lead):
    cols = int(np.prod(a.shape)) // lead if lead else int(np.prod(a.shape[1:]))
    return np.ascontiguousarray(a).reshape(lead, cols).view(float)


def _presolve(packed, tol=1e-9):
    """Drop linearly dependent constraints; detect inconsistent ones.

    Rows are normalised to unit length first.  Returns ``(keep, norms)`` or
    raises ``_Infeasible`` if a dependent row disagrees on its right-hand side.
    """
    rows = packed.real_rows()
    m = rows.shape[0]
    if m == 0:
        return np.arange(0), np.ones(0)
    norms = np.linalg.norm(rows, axis=1)
    b = packed.b
    zero = norms <= 1e-14
    if np.any(np.abs(b[zero]) > 1e-12):
        raise _Infeasible()
    safe = np.where(zero, 1.0, norms)
    An = rows / safe[:, None]
    bn = b / safe
    live = np.flatnonzero(~zero)
    if live.size == 0:
        return live, safe
    _, R, piv = scipy.linalg.qr(An[live].T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * max(diag[0], 1e-300)))
    keep = np.sort(live[piv[:rank]])
    drop = np.setdiff1d(live, keep)
    if drop.size:
        coef, *_ = np.linalg.lstsq(An[keep].T, An[drop].T, rcond=None)
        mismatch = np.abs(bn[drop] - coef.T @ bn[keep])
        if np.any(mismatch > 1e-8 * (1.0 + np.max(np.abs(bn)))):
            raise _Infeasible()
    return keep, safe


class _Infeasible(Exception):
    pass


def _inner(P, Q):
    # sum_j Re tr(P_j Q_j) for stacks of Hermitian matrices
    return float(sum(np.real(np.einsum("nij,nji->", p, q)) for p, q in zip(P, Q)))


def _max_step(P, dP):
    """Largest alpha with P + alpha dP >= 0 (P positive definite stacks)."""
    lam = np.inf
    for p, dp in zip(P, dP):
        try:
            L = np.linalg.cholesky(p)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("iterate lost positive definiteness") from exc
        T = np.linalg.solve(L, dp)
        Q = np.linalg.solve(L, np.swapaxes(T, -1, -2).conj())
        w = np.linalg.eigvalsh(herm(Q))
        lam = min(lam, float(np.min(w)))
    return np.inf if lam >= 0 else -1.0 / lam


def solve_sdp(p: SdpProblem, cfg: NumericConfig = DEFAULT) -> SdpSolution:
    """Solve ``p`` with an infeasible-start HKM interior-point method.

    The result always carries a status; use
    :meth:`SdpSolution.require_optimal` to turn a failure into
    :class:`~thermosteer.errors.SolverError`.
    """
    packed = _Packed(p)
    m_all = p.n_constraints
    try:
        keep, norms = _presolve(packed)
    except _Infeasible:
        return _empty(p, m_all, Status.PRIMAL_INFEASIBLE)

    C = packed.C
    A = [a[keep] / norms[keep][:, None, None, None] for a in packed.A]
    b = packed.b[keep] / norms[keep]
    m = len(keep)
    Ar = [_rview(a, m) for a in A]
    n_total = sum(d * len(idx) for d, idx in packed.groups)

    def op_A(P):
        out = np.zeros(m)
        for ar, pk in zip(Ar, P):
            if m:
                out += ar @ np.ascontiguousarray(pk).reshape(-1).view(float)
        return out

    def op_At(y):
        out = []
        for a, c in zip(A, C):
            if m:
                out.append(np.tensordot(y, a, axes=(0, 0)))
            else:
                out.append(np.zeros_like(c))
        return out

    # Gram matrix of the normalised rows; used to keep steps primal-feasible
    gram = scipy.linalg.cho_factor(sum(ar @ ar.T for ar in Ar)) if m else None

    cmax = max(float(np.max(np.abs(c))) for c in C)
    bmax = float(np.max(np.abs(b))) if m else 0.0
    tau = 1.0 + cmax
    X = [tau * np.broadcast_to(np.eye(d), (len(idx), d, d)).astype(complex) for d, idx in packed.groups]
    S = [x.copy() for x in X]
    y = np.zeros(m)

    best = None
    best_merit = np.inf
    since_best = 0
    status = Status.NUMERICAL_FAILURE
    it = 0
    for it in range(cfg.max_iters + 1):
        rp = b - op_A(X)
        Aty = op_At(y)
        Rd = [c - aty - s for c, aty, s in zip(C, Aty, S)]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        mu = _inner(X, S) / n_total
        relp = float(np.max(np.abs(rp))) / (1.0 + bmax) if m else 0.0
        rd_abs = max(float(np.max(np.abs(r))) for r in Rd)
        reld = rd_abs / (1.0 + cmax)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        merit = max(relp, reld, relgap)
        if cfg.trace is not None:
            cfg.trace.write(f"{it:4d} pobj={pobj:+.12e} dobj={dobj:+.12e} "
                            f"gap={relgap:.2e} pinf={relp:.2e} dinf={reld:.2e} mu={mu:.2e}\n")
        if merit < best_merit:
            since_best = 0 if merit < 0.9 * best_merit else since_best + 1
            best_merit = merit
            best = ([x.copy() for x in X], y.copy(), [s.copy() for s in S])
        else:
            since_best += 1

        if relp <= cfg.feas_tol and reld <= cfg.feas_tol and relgap <= cfg.gap_tol:
            status = Status.OPTIMAL
            best = (X, y, S)
            break
        big = cfg.infeasibility_ratio
        if dobj > big * (1.0 + cmax) and rd_abs <= 1e-6 * abs(dobj):
            status = Status.PRIMAL_INFEASIBLE
            break
        if -pobj > big * (1.0 + bmax) and (not m or np.max(np.abs(rp)) <= 1e-6 * abs(pobj)):
            status = Status.DUAL_INFEASIBLE
            break
        if since_best >= cfg.stagnation_iters or it == cfg.max_iters:
            break

        try:
            Z = [herm(np.linalg.inv(s)) for s in S]
            if m:
                M = np.zeros((m, m))
                for a, ar, x, z in zip(A, Ar, X, Z):
                    V = x[None] @ a @ z[None]
                    M += ar @ _rview(V, m).T
                M = 0.5 * (M + M.T)
                try:
                    fac = scipy.linalg.cho_factor(M)
                    solve_M = lambda r: scipy.linalg.cho_solve(fac, r)  # noqa: E731
                except np.linalg.LinAlgError:
                    solve_M = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731
            XRdZ = [x @ r @ z for x, r, z in zip(X, Rd, Z)]
            base = rp + op_A(XRdZ)

            def direction(G):
                dy = solve_M(base - op_A(G)) if m else np.zeros(0)
                dS = [r - aty for r, aty in zip(Rd, op_At(dy))]
                dX = [herm(g - x @ ds @ z) for g, x, ds, z in zip(G, X, dS, Z)]
                return dX, dy, dS

            # predictor
            dXa, dya, dSa = direction([-x for x in X])
            ap = min(1.0, _max_step(X, dXa))
            ad = min(1.0, _max_step(S, dSa))
            mu_aff = _inner([x + ap * dx for x, dx in zip(X, dXa)],
                            [s + ad * ds for s, ds in zip(S, dSa)]) / n_total
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
            # corrector
            G = [sigma * mu * z - x - dx @ ds @ z for z, x, dx, ds in zip(Z, X, dXa, dSa)]
            dX, dy, dS = direction(G)
            if m:
                # the Schur solve loses accuracy as mu -> 0; project dX back onto A(dX) = rp
                fix = op_At(scipy.linalg.cho_solve(gram, rp - op_A(dX)))
                dX = [herm(dx + f) for dx, f in zip(dX, fix)]
            ap = min(1.0, cfg.step_fraction * _max_step(X, dX))
            ad = min(1.0, cfg.step_fraction * _max_step(S, dS))
        except (NumericalFailure, np.linalg.LinAlgError, ValueError):
            break
        if not (np.isfinite(ap) and np.isfinite(ad)) or max(ap, ad) < 1e-12:
            break
        X = [x + ap * dx for x, dx in zip(X, dX)]
        y = y + ad * dy
        S = [s + ad * ds for s, ds in zip(S, dS)]

    Xf, yf, Sf = best if best is not None else (X, y, S)
    sol = _finish(p, packed, keep, norms, Xf, yf, Sf, status, it)
    if sol.status is Status.NUMERICAL_FAILURE and _acceptable(sol, p):
        sol.status = Status.OPTIMAL
    return sol


def _acceptable(sol, p):
    # looser certificate used when the strict tolerances cannot be reached
    if not np.isfinite(sol.primal_obj) or not np.isfinite(sol.dual_obj):
        return False
    if sol.primal_residual > 1e-8 or sol.dual_residual > 1e-8:
        return False
    if sol.gap > 1e-8 * (1.0 + abs(sol.primal_obj)):
        return False
    return all(np.linalg.eigvalsh(x)[0] >= -DEFAULT.tol_psd for x in sol.X) and \
        all(np.linalg.eigvalsh(s)[0] >= -DEFAULT.tol_psd for s in sol.S)


def _finish(p, packed, keep, norms, X, y, S, status, it):
    Xl = packed.unpack(X)
    Sl = packed.unpack(S)
    yfull = np.zeros(p.n_constraints)
    yfull[keep] = y / norms[keep]
    pobj = float(sum(np.real(np.trace(c @ x)) for c, x in zip(p.C, Xl)))
    dobj = float(packed.b @ yfull)
    res = 0.0
    for A, bk in p.constraints:
        v = sum(np.real(np.trace(a @ x)) for a, x in zip(A, Xl) if a is not None)
        res = max(res, abs(v - bk))
    dres = 0.0
    for j, (c, s) in enumerate(zip(p.C, Sl)):
        aty = c.copy() * 0
        for k, (A, _) in enumerate(p.constraints):
            if A[j] is not None and yfull[k] != 0:
                aty += yfull[k] * A[j]
        dres = max(dres, float(np.max(np.abs(c - aty - s))))
    return SdpSolution(X=Xl, y=yfull, S=Sl, primal_obj=pobj, dual_obj=dobj,
                       gap=abs(pobj - dobj), status=status, iterations=it,
                       primal_residual=res, dual_residual=dres / (1.0 + max(
                           float(np.max(np.abs(c))) for c in p.C)))


def _empty(p, m, status):
    nan = float("nan")
    return SdpSolution(X=[np.full((d, d), nan, dtype=complex) for d in p.blocks], y=np.full(m, nan),
                       S=[np.full((d, d), nan, dtype=complex) for d in p.blocks],
                       primal_obj=nan, dual_obj=nan, gap=nan, status=status)


class SdpBuilder:
    """Incremental construction of an :class:`SdpProblem`.

    Blocks are added by name; matrix-valued equalities are split into
    real scalar constraints along an orthonormal Hermitian basis.

    >>> sb = SdpBuilder()
    >>> sb.add_block("x", 1, objective=[[1.0]])
    0
    >>> sol = solve_sdp(sb.build())
    >>> round(sol.primal_obj, 8)
    0.0
    """

    def __init__(self):
        self.names = {}
        self.blocks = []
        self.C = []
        self.constraints = []

    def add_block(self, name, dim, objective=None):
        if name in self.names:
            raise ValueError(f"duplicate block name {name!r}")
        self.names[name] = len(self.blocks)
        self.blocks.append(int(dim))
        self.C.append(np.zeros((dim, dim), dtype=complex) if objective is None
                      else np.asarray(objective, dtype=complex))
        return self.names[name]

    def add_scalar_eq(self, terms, rhs):
        """``sum tr(A X_name) = rhs`` for ``terms = {name: A}``."""
        A = [None] * len(self.blocks)
        for name, a in terms.items():
            j = self.names[name]
            a = np.asarray(a, dtype=complex)
            A[j] = a.reshape(self.blocks[j], self.blocks[j])
        self.constraints.append((A, float(rhs)))

    def add_matrix_eq(self, dim, terms, rhs):
        """``sum_t L_t(X_t) = rhs`` as a ``dim x dim`` Hermitian equality.

        ``terms`` maps block names to the *adjoint* of the linear map applied
        to that block: a callable taking a ``dim x dim`` basis element ``E``
        and returning the block matrix ``L^*(E)``.  See :func:`scaled` and
        :func:`times_matrix` for the common cases.
        """
        rhs = np.asarray(rhs, dtype=complex)
        for E in hermitian_basis(dim):
            A = [None] * len(self.blocks)
            for name, adj in terms.items():
                j = self.names[name]
                a = np.asarray(adj(E), dtype=complex).reshape(self.blocks[j], self.blocks[j])
                A[j] = a if A[j] is None else A[j] + a
            self.constraints.append((A, float(np.real(np.trace(E @ rhs)))))

    def build(self):
        return SdpProblem(list(self.blocks), list(self.C), list(self.constraints))

    def block(self, sol, name):
        return sol.X[self.names[name]]


def scaled(c):
    """Adjoint of ``X -> c X``."""
    return lambda E: c * E


def times_matrix(M):
    """Adjoint of the map ``x -> x M`` from a 1x1 block to matrices."""
    M = np.asarray(M, dtype=complex)
    return lambda E: np.array([[np.trace(E @ M)]])


def diamond_norm(delta_choi, dims, cfg: NumericConfig = DEFAULT) -> float:
    """Diamond norm of a Hermiticity-preserving map given by its Choi matrix.

    ``delta_choi`` uses the package convention: trace-normalised Choi matrix
    on ``out (x) in`` (see :func:`thermosteer.objects.choi_of_map`).
    The program maximises ``tr J (Q0 - Q1)`` over ``Q0, Q1 >= 0`` with
    ``Q0 + Q1 <= I (x) rho`` and ``rho`` a density matrix, where ``J`` is the
    unnormalised Choi matrix.
    """
    d_in, d_out = (int(d) for d in dims)
    D = d_in * d_out
    J = np.asarray(delta_choi, dtype=complex) * d_in
    if J.shape != (D, D):
        raise ShapeError(f"Choi matrix of shape {J.shape} does not match dims {dims}")
    if hermiticity_error(J) > 1e-9 * max(1.0, float(np.max(np.abs(J)))):
        raise ValidationError("Choi matrix of a Hermiticity-preserving map must be Hermitian")
    J = herm(J)
    scale = float(np.max(np.abs(J)))
    if scale == 0.0:
        return 0.0
    Jn = J / scale
    sb = SdpBuilder()
    sb.add_block("q0", D, objective=-Jn)
    sb.add_block("q1", D, objective=Jn)
    sb.add_block("w", D)
    sb.add_block("rho", d_in)
    sb.add_matrix_eq(D, {
        "q0": scaled(1.0), "q1": scaled(1.0), "w": scaled(1.0),
        "rho": lambda E: -partial_trace(E, (d_out, d_in), "B"),
    }, np.zeros((D, D)))
    sb.add_scalar_eq({"rho": np.eye(d_in)}, 1.0)
    sol = solve_sdp(sb.build(), cfg).require_optimal()
    return max(0.0, -sol.primal_obj) * scale
