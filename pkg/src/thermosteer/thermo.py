"""Thermalisation schedules, the thermalising channel and survival times.

A schedule ``h`` describes how much of the input survives after time ``t``::

    D_t(rho) = h(t) rho + (1 - h(t)) tr(rho) gamma

The survival time of an instrument family's steering is ``h^{-1}(2^{-SR})``.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT, NumericConfig
from .errors import DomainError, Inconclusive, ValidationError
from .linalg import as_hermitian, herm, min_eigenvalue
from .objects import (Assemblage, Channel, InstrumentFamily, ThermalContext, apply_instrument,
                      identity_channel, replacement_channel, thermal_state)
from .sdp import diamond_norm
from .steering import sr_gamma


class Schedule:
    """A thermalisation schedule ``h`` together with its inverse.

    Use the constructors :meth:`partial`, :meth:`rational`, :meth:`custom`
    and :meth:`from_table`.  Every schedule is validated on a logarithmic
    time grid when built.
    """

    def __init__(self, kind, h, h_inv, scale=1.0, params=None, validate=True):
        self.kind = kind
        self._h = h
        self._h_inv = h_inv
        self.scale = float(scale)
        self.params = dict(params or {})
        if validate:
            validate_schedule(self)

    def h(self, t):
        if np.any(np.asarray(t) < 0):
            raise DomainError("time must be non-negative")
        return self._h(t)

    def h_inv(self, y):
        y = float(y)
        if not 0 < y <= 1:
            raise DomainError(f"h^-1 is defined on (0, 1], got {y}")
        if y == 1.0:
            return 0.0
        return float(self._h_inv(y))

    def to_json(self):
        return {"kind": self.kind, **self.params}

    @classmethod
    def partial(cls, t0=1.0):
        """``h(t) = exp(-t / t0)``."""
        t0 = _positive(t0, "t0")
        return cls("partial", lambda t: np.exp(-np.asarray(t, dtype=float) / t0),
                   lambda y: -t0 * math.log(y), t0, {"t0": t0})

    @classmethod
    def rational(cls, t0=1.0):
        """``h(t) = 1 / (1 + t / t0)``."""
        t0 = _positive(t0, "t0")
        return cls("rational", lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float) / t0),
                   lambda y: t0 * (1.0 / y - 1.0), t0, {"t0": t0})

    @classmethod
    def custom(cls, h, h_inv=None, scale=1.0, numeric_inverse=False, t_hi=None):
        """User schedule.  ``h_inv`` is required unless ``numeric_inverse`` is set.

        The numerical inverse brackets the root on ``[0, t_hi]`` (default
        ``1e12 * scale``) and solves to an absolute tolerance of ``1e-10``.
        """
        if h_inv is None:
            if not numeric_inverse:
                raise ValidationError("custom schedules must supply h_inv (or opt into numeric_inverse)")
            hi = 1e12 * scale if t_hi is None else t_hi

            def h_inv(y):
                return brentq(lambda t: float(h(t)) - y, 0.0, hi, xtol=1e-10, rtol=4 * np.finfo(float).eps)
        return cls("custom", h, h_inv, scale)

    @classmethod
    def from_table(cls, samples):
        """Piecewise log-linear schedule through ``[[t, h], ...]`` samples.

        The first sample must be ``(0, 1)``.  Beyond the last sample the
        final segment's decay rate is continued.
        """
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
            raise ValidationError("table schedules need at least two [t, h] samples")
        ts, hs = arr[:, 0], arr[:, 1]
        if ts[0] != 0 or hs[0] != 1:
            raise ValidationError("table must start at (t=0, h=1)")
        if np.any(np.diff(ts) <= 0) or np.any(np.diff(hs) >= 0) or np.any(hs <= 0):
            raise ValidationError("table must be strictly increasing in t and strictly decreasing in h")
        lh = np.log(hs)
        rate = (lh[-1] - lh[-2]) / (ts[-1] - ts[-2])

        def h(t):
            t = np.asarray(t, dtype=float)
            inner = np.interp(t, ts, lh)
            tail = lh[-1] + rate * (t - ts[-1])
            return np.exp(np.where(t <= ts[-1], inner, tail))

        def h_inv(y):
            ly = math.log(y)
            if ly >= lh[-1]:
                return float(np.interp(ly, lh[::-1], ts[::-1]))
            return float(ts[-1] + (ly - lh[-1]) / rate)

        return cls("custom-table", h, h_inv, ts[-1] if ts[-1] > 0 else 1.0,
                   {"samples": arr.tolist()}, validate=True)

    @classmethod
    def from_json(cls, obj):
        kind = obj.get("kind")
        if kind == "partial":
            return cls.partial(obj.get("t0", 1.0))
        if kind == "rational":
            return cls.rational(obj.get("t0", 1.0))
        if kind == "custom-table":
            return cls.from_table(obj["samples"])
        raise ValidationError(f"unknown schedule kind {kind!r}")


def _positive(v, name):
    v = float(v)
    if not np.isfinite(v) or v <= 0:
        raise DomainError(f"{name} must be positive and finite")
    return v


def validate_schedule(s: Schedule, n=64):
    """Check ``h(0) = 1``, monotone decay to zero and the inverse on a log grid."""
    if abs(float(s.h(0.0)) - 1.0) > 1e-12:
        raise ValidationError("schedule must satisfy h(0) = 1")
    grid = s.scale * np.logspace(-6, 12, n)
    hs = np.array([float(s.h(t)) for t in grid])
    if not np.all(np.isfinite(hs)) or np.any(hs < 0) or np.any(hs > 1):
        raise ValidationError("schedule values must lie in [0, 1]")
    live = hs[:-1] > 1e-6
    dh = np.diff(hs)
    if np.any(dh[live] >= 0) or np.any(dh > 0):
        raise ValidationError("schedule must be strictly decreasing")
    if hs[-1] >= 1e-6:
        raise ValidationError("schedule does not decay below 1e-6 on the validation grid")
    # inverse check where h is resolvable in double precision
    for t, y in zip(grid, hs):
        if 1e-12 < y < 1 - 1e-4:
            back = s.h_inv(y)
            if abs(back - t) > 1e-9 * t:
                raise ValidationError(f"h_inv(h(t)) != t at t={t:.3e} (got {back:.6e})")


# --------------------------------------------------------------------------


def thermalisation_channel(gamma, h):
    """``rho -> h rho + (1 - h) tr(rho) gamma``."""
    gamma = as_hermitian(gamma, tol=1e-10)
    d = gamma.shape[0]
    return Channel(h * identity_channel(d).choi + (1 - h) * replacement_channel(gamma).choi, d, d)


def thermalise_h(sigma: Assemblage, gamma, h):
    p = sigma.probs
    out = h * sigma.sigma + (1 - h) * p[:, :, None, None] * np.asarray(gamma)[None, None]
    return Assemblage(out, validate=False)


def thermalise(sigma: Assemblage, gamma, sched: Schedule, t):
    if t < 0:
        raise DomainError("time must be non-negative")
    return thermalise_h(sigma, gamma, float(sched.h(t)))


def _gamma_of(ctx_or_gamma):
    if isinstance(ctx_or_gamma, ThermalContext):
        return thermal_state(ctx_or_gamma)
    return as_hermitian(ctx_or_gamma, tol=1e-10)


def t_min_from_sr(sr, sched: Schedule, tol=DEFAULT.tol_member):
    if sr <= tol:
        return 0.0
    return sched.h_inv(2.0 ** (-sr))


def t_min(fam: InstrumentFamily, ctx, sched: Schedule, cfg: NumericConfig = DEFAULT):
    """Longest time the family's output on ``gamma`` stays steerable."""
    gamma = _gamma_of(ctx)
    sigma = apply_instrument(fam, gamma)
    return t_min_from_sr(sr_gamma(sigma, gamma, cfg).sr, sched, cfg.tol_member)


def davies_map(p, A, Gamma, t):
    """Single-qubit Davies map towards ``gamma = diag(p, 1 - p)``.

    Requires ``0 <= A/2 <= Gamma``, ``0 < p < 1`` and ``t >= 0``.
    """
    if not 0 < p < 1:
        raise DomainError("ground-state population must lie in (0, 1)")
    if A < 0 or A / 2 > Gamma:
        raise DomainError("Davies rates must satisfy 0 <= A/2 <= Gamma")
    if t < 0:
        raise DomainError("time must be non-negative")
    ea = math.exp(-A * t)
    eg = math.exp(-Gamma * t)
    S = np.zeros((4, 4))
    # superoperator on row-major vec: index (i, j) -> 2 i + j
    S[0, 0] = 1 - (1 - p) * (1 - ea)
    S[3, 0] = (1 - p) * (1 - ea)
    S[0, 3] = p * (1 - ea)
    S[3, 3] = 1 - p * (1 - ea)
    S[1, 1] = S[2, 2] = eg
    t4 = S.reshape(2, 2, 2, 2)
    J = t4.transpose(0, 2, 1, 3).reshape(4, 4) / 2
    return Channel(J, 2, 2)


# --------------------------------------------------------------------------
# evolutions and the finite-time harness


class PositiveMap:
    """A trace-preserving map known only to be positive (not necessarily CP)."""

    def __init__(self, superop, d):
        self.S = np.asarray(superop, dtype=complex)
        self.d_in = self.d_out = d
        t = self.S.reshape(d, d, d, d)
        self.choi = t.transpose(0, 2, 1, 3).reshape(d * d, d * d) / d

    def __call__(self, rho):
        return (self.S @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(self.d_out, self.d_out)


def check_positive(m, d, n=200, seed=0):
    """Smallest output eigenvalue over a sample of pure input states."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(n):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        worst = min(worst, min_eigenvalue(herm(m(np.outer(v, v.conj())))))
    return worst


@dataclass
class Evolution:
    """A one-parameter family of positive trace-preserving maps ``t -> N_t``."""

    map_at: Callable
    label: str = ""
    flagged: bool = False  # set when a map passed only the positivity check

    def at(self, t):
        m = self.map_at(t)
        if isinstance(m, Channel):
            return m
        if check_positive(m, m.d_in) < -1e-9:
            raise ValidationError(f"map at t={t:g} is not positive")
        self.flagged = True
        return m


def envelope_evolution(gamma, c, label="envelope"):
    """``N_t = c(t) id + (1 - c(t)) gamma tr`` for an envelope ``c`` in [0, 1]."""
    return Evolution(lambda t: thermalisation_channel(gamma, float(c(t))), label)


def schedule_evolution(gamma, sched: Schedule):
    return envelope_evolution(gamma, sched.h, label=f"schedule:{sched.kind}")


@dataclass
class TStar:
    t_star: float
    crossings: List[dict] = field(default_factory=list)
    flagged: bool = False


def _evolve(sigma, m):
    s = np.array([[m(sigma.sigma[x, a]) for a in range(sigma.n_outcomes)]
                  for x in range(sigma.n_settings)])
    return Assemblage(herm(s), validate=False)


def find_t_star(sigma: Assemblage, gamma, ev: Evolution, t_max, grid=200, tol=None,
                cfg: NumericConfig = DEFAULT):
    """Last time at which the evolved assemblage leaves the steerable region.

    The interval ``[0, t_max]`` is scanned on ``grid + 1`` points and each
    change of membership is refined by bisection to ``tol`` (default
    ``1e-3 * t_max``).  Raises :class:`Inconclusive` if the assemblage is
    still steerable at ``t_max``.
    """
    gamma = as_hermitian(gamma, tol=1e-10)
    if np.any(sigma.probs <= 0):
        raise DomainError("every member must have positive weight")
    if np.max(np.abs(sigma.reduced - gamma)) > 1e-8:
        raise DomainError("assemblage reduced state must equal gamma")
    tol = 1e-3 * t_max if tol is None else tol
    d = sigma.dim
    end = ev.at(t_max)
    dist = diamond_norm(end.choi - replacement_channel(gamma).choi, (d, d))
    if dist >= 0.05:
        warnings.warn(f"evolution is {dist:.3g} from full thermalisation at t_max", RuntimeWarning)

    def sr_at(t):
        return sr_gamma(_evolve(sigma, ev.at(t)), gamma, cfg).sr

    def steer(t):
        return sr_at(t) > cfg.tol_member

    ts = np.linspace(0.0, t_max, grid + 1)
    states = [steer(t) for t in ts]
    crossings = []
    for k in range(grid):
        if states[k] == states[k + 1]:
            continue
        lo, hi = ts[k], ts[k + 1]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if steer(mid) == states[k]:
                lo = mid
            else:
                hi = mid
        kind = "steerable->lhs" if states[k] else "lhs->steerable"
        crossings.append({"t": float(0.5 * (lo + hi)), "kind": kind})
    if states[-1]:
        raise Inconclusive(t_max, 1.0 - 2.0 ** (-sr_at(t_max)))
    downs = [c["t"] for c in crossings if c["kind"] == "steerable->lhs"]
    return TStar(float(downs[-1]) if downs else 0.0, crossings, ev.flagged)
