"""States, channels, instruments and assemblages.

Conventions
-----------
* Choi matrices live on ``out (x) in`` and are trace-normalised for
  trace-preserving maps::

      J = (1/d_in) sum_ij  N(|i><j|) (x) |i><j|

  so the identity channel maps to ``|Phi+><Phi+|`` and
  ``N(rho) = d_in tr_in[(I (x) rho^T) J]``.
* Assemblages are stored as arrays ``sigma[x, a]`` of shape
  ``(n_settings, n_outcomes, d, d)``.
* Instrument filters are keyed by ``(a, x)``.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, KB_EV
from .errors import DomainError, ShapeError, ValidationError
from .linalg import as_hermitian, herm, kron, min_eigenvalue, partial_trace, trace_norm

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def proj(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def max_entangled(d):
    """``|Phi+> = sum_i |ii> / sqrt(d)`` as a vector."""
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


# --------------------------------------------------------------------------
# thermal states


@dataclass(frozen=True)
class ThermalContext:
    """Hamiltonian (eV) and temperature (K) defining a Gibbs state."""

    hamiltonian: np.ndarray
    temperature: float
    kB: float = KB_EV

    def __post_init__(self):
        H = as_hermitian(self.hamiltonian)
        object.__setattr__(self, "hamiltonian", H)
        T = float(self.temperature)
        if not np.isfinite(T) or T <= 0:
            raise DomainError(f"temperature must be finite and positive, got {T}")
        object.__setattr__(self, "temperature", T)

    @property
    def kT(self):
        return self.kB * self.temperature

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def gamma(self):
        return thermal_state(self)


def gibbs(H, kT):
    """``exp(-H/kT) / Z``; the spectrum is shifted so the exponent is <= 0."""
    H = as_hermitian(H)
    w, v = np.linalg.eigh(H)
    x = -(w - w[0]) / kT
    p = np.exp(x)
    p /= p.sum()
    return herm((v * p) @ v.conj().T)


def thermal_state(ctx: ThermalContext):
    return gibbs(ctx.hamiltonian, ctx.kT)


def log_partition(H, kT):
    """``ln tr exp(-H/kT)`` evaluated without overflow."""
    w = np.linalg.eigvalsh(as_hermitian(H))
    x = -w / kT
    top = np.max(x)
    return float(top + np.log(np.sum(np.exp(x - top))))


def isotropic_state(d, eps, require_full_rank=True):
    """``(1 - eps) |Phi+><Phi+| + eps I / d^2``.

    ``eps = 0`` (the pure maximally entangled state) is only accepted with
    ``require_full_rank=False``.
    """
    eps = float(eps)
    lo_ok = eps > 0 or (eps == 0 and not require_full_rank)
    if not lo_ok or eps > 1:
        raise DomainError(f"isotropic mixing parameter must lie in (0, 1], got {eps}")
    phi = proj(max_entangled(d))
    return (1 - eps) * phi + eps * np.eye(d * d) / d ** 2


# --------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class Channel:
    """A completely positive map stored as its (trace-normalised) Choi matrix."""

    choi: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        d_in, d_out = int(self.d_in), int(self.d_out)
        J = np.asarray(self.choi, dtype=complex)
        if J.shape != (d_in * d_out, d_in * d_out):
            raise ShapeError(f"Choi shape {J.shape} does not match d_in={d_in}, d_out={d_out}")
        J = as_hermitian(J, tol=1e-10)
        if min_eigenvalue(J) < -DEFAULT.tol_psd:
            raise ValidationError("Choi matrix is not positive semidefinite (map is not CP)")
        object.__setattr__(self, "choi", herm(J))
        object.__setattr__(self, "d_in", d_in)
        object.__setattr__(self, "d_out", d_out)

    def __call__(self, rho):
        return map_of_choi(self, rho)

    def tp_residual(self):
        red = partial_trace(self.choi, (self.d_out, self.d_in), "B")
        return float(np.max(np.abs(red - np.eye(self.d_in) / self.d_in)))

    @property
    def is_tp(self):
        return self.tp_residual() <= 1e-9

    def superop(self):
        """Matrix acting on row-major ``vec(rho)``."""
        t = self.choi.reshape(self.d_out, self.d_in, self.d_out, self.d_in)
        return self.d_in * t.transpose(0, 2, 1, 3).reshape(self.d_out ** 2, self.d_in ** 2)

    def __add__(self, other):
        _same_dims(self, other)
        return Channel(self.choi + other.choi, self.d_in, self.d_out)

    def scale(self, c):
        return Channel(c * self.choi, self.d_in, self.d_out)


def _same_dims(a, b):
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise ShapeError("channel dimensions differ")


def choi_of_map(kraus_list):
    """Choi matrix of ``rho -> sum_k K rho K^dagger``."""
    ks = [np.atleast_2d(np.asarray(k, dtype=complex)) for k in kraus_list]
    if not ks:
        raise ShapeError("empty Kraus list")
    d_out, d_in = ks[0].shape
    if any(k.shape != (d_out, d_in) for k in ks):
        raise ShapeError("Kraus operators have inconsistent shapes")
    V = np.stack([k.reshape(-1) for k in ks]) / np.sqrt(d_in)
    return Channel(V.T @ V.conj(), d_in, d_out)


def channel_from_superop(S, d_in, d_out):
    t = np.asarray(S, dtype=complex).reshape(d_out, d_out, d_in, d_in)
    J = t.transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in) / d_in
    return Channel(herm(J), d_in, d_out)


def map_of_choi(c: Channel, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (c.d_in, c.d_in):
        raise ShapeError(f"input of shape {rho.shape} for a channel on dimension {c.d_in}")
    t = c.choi.reshape(c.d_out, c.d_in, c.d_out, c.d_in)
    return c.d_in * np.einsum("aibj,ij->ab", t, rho)


def compose(second: Channel, first: Channel):
    """``second o first``."""
    if first.d_out != second.d_in:
        raise ShapeError("cannot compose: dimension mismatch")
    return channel_from_superop(second.superop() @ first.superop(), first.d_in, second.d_out)


def tensor(a: Channel, b: Channel):
    """Choi matrix of ``a (x) b`` with factor order ``(a, b)`` on both sides."""
    ta = a.choi.reshape(a.d_out, a.d_in, a.d_out, a.d_in)
    tb = b.choi.reshape(b.d_out, b.d_in, b.d_out, b.d_in)
    t = np.einsum("aibj,ckdl->acikbdjl", ta, tb)
    D = a.d_out * b.d_out * a.d_in * b.d_in
    return Channel(t.reshape(D, D), a.d_in * b.d_in, a.d_out * b.d_out)


def identity_channel(d):
    return choi_of_map([np.eye(d)])


def unitary_channel(U):
    return choi_of_map([U])


def replacement_channel(state, d_in=None):
    """``rho -> state * tr(rho)``."""
    state = as_hermitian(state, tol=1e-10)
    d_in = state.shape[0] if d_in is None else d_in
    return Channel(kron(state, np.eye(d_in) / d_in), d_in, state.shape[0])


def is_gibbs_preserving(ch: Channel, gamma, tol=1e-9):
    """Return ``(ok, residual)`` where residual is ``||ch(gamma) - gamma||_1``."""
    res = trace_norm(herm(ch(gamma) - gamma))
    return res <= tol, res


def choi_distance(a: Channel, b: Channel):
    _same_dims(a, b)
    return trace_norm(a.choi - b.choi)


# --------------------------------------------------------------------------
# instruments


class InstrumentFamily:
    """Instruments ``{E_{a|x}}`` sharing one average channel.

    ``filters`` maps ``(a, x)`` to a :class:`Channel`.  Families whose
    settings average to different channels are rejected unless
    ``allow_distinct_averages`` is set; such families are incompatible for a
    trivial reason and fall outside the resource theory.
    """

    def __init__(self, filters, n_outcomes, n_settings, allow_distinct_averages=False,
                 tol=1e-9):
        self.n_outcomes = int(n_outcomes)
        self.n_settings = int(n_settings)
        keys = set(itertools.product(range(self.n_outcomes), range(self.n_settings)))
        if set(filters) != keys:
            raise ShapeError("filters must be keyed by every (a, x) pair")
        self.filters = dict(filters)
        first = self.filters[(0, 0)]
        self.d_in, self.d_out = first.d_in, first.d_out
        for ch in self.filters.values():
            _same_dims(ch, first)
        self.averages = []
        for x in range(self.n_settings):
            tot = sum((self.filters[(a, x)] for a in range(1, self.n_outcomes)),
                      self.filters[(0, x)])
            if tot.tp_residual() > tol:
                raise ValidationError(f"instrument for setting {x} is not trace-preserving")
            self.averages.append(tot)
        spread = max(choi_distance(self.averages[0], av) for av in self.averages)
        self.average_spread = spread
        if spread > tol and not allow_distinct_averages:
            raise ValidationError(
                f"settings do not share an average channel (Choi distance {spread:.3e})")

    @property
    def dim(self):
        return self.d_in

    @property
    def average_channel(self):
        return self.averages[0]

    def __getitem__(self, key):
        return self.filters[key]

    def map_filters(self, fn):
        """New family with every filter replaced by ``fn(channel)``."""
        return InstrumentFamily({k: fn(v) for k, v in self.filters.items()},
                                self.n_outcomes, self.n_settings,
                                allow_distinct_averages=self.average_spread > 1e-9)

    @classmethod
    def from_kraus(cls, kraus, n_outcomes, n_settings, **kw):
        return cls({k: choi_of_map(v) for k, v in kraus.items()}, n_outcomes, n_settings, **kw)

    @classmethod
    def from_choi(cls, chois, n_outcomes, n_settings, d_in, d_out=None, **kw):
        d_out = d_in if d_out is None else d_out
        return cls({k: Channel(v, d_in, d_out) for k, v in chois.items()},
                   n_outcomes, n_settings, **kw)


def lueders_family(povms, **kw):
    """Instruments ``rho -> sqrt(E) rho sqrt(E)`` for ``povms[x][a]``."""
    n_x, n_a = len(povms), len(povms[0])
    kraus = {}
    for x, effects in enumerate(povms):
        if len(effects) != n_a:
            raise ShapeError("every setting needs the same number of outcomes")
        for a, E in enumerate(effects):
            w, v = np.linalg.eigh(as_hermitian(E, tol=1e-10))
            kraus[(a, x)] = [(v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T]
    return InstrumentFamily.from_kraus(kraus, n_a, n_x, **kw)


def measure_prepare_family(povms, states):
    """Instruments ``rho -> tr(E_{a|x} rho) omega_{a|x}``.

    ``states`` is either one state used for every outcome or a nested list
    ``states[x][a]``.
    """
    n_x, n_a = len(povms), len(povms[0])
    filters = {}
    for x in range(n_x):
        for a in range(n_a):
            E = as_hermitian(povms[x][a], tol=1e-10)
            w = states if np.ndim(states) == 2 else states[x][a]
            w = as_hermitian(w, tol=1e-10)
            # Choi of rho -> tr(E rho) w  is  (w (x) E^T) / d_in
            filters[(a, x)] = Channel(kron(w, E.T) / E.shape[0], E.shape[0], w.shape[0])
    return InstrumentFamily(filters, n_a, n_x)


def xz_projectors():
    """``[[|+><+|, |-><-|], [|0><0|, |1><1|]]`` indexed ``[x][a]``."""
    plus, minus = ket(1, 1), ket(1, -1)
    return [[proj(plus), proj(minus)], [proj(ket(1, 0)), proj(ket(0, 1))]]


def pauli_xz_family():
    """Qubit family whose output on ``I/2`` is the X/Z Pauli assemblage.

    Filter ``(a, x)`` discards its input and prepares ``P_{a|x}/2`` with
    ``P`` the X/Z eigenprojectors, so all settings share the average channel
    ``rho -> tr(rho) I/2``.
    """
    P = xz_projectors()
    filters = {(a, x): replacement_channel(P[x][a] / 2) for x in range(2) for a in range(2)}
    return InstrumentFamily(filters, 2, 2)


def xz_measure_prepare(out_state=None):
    """Measure X or Z, prepare ``out_state`` (default ``I/2``)."""
    w = I2 / 2 if out_state is None else out_state
    return measure_prepare_family(xz_projectors(), w)


def compatible_family(parent, postprocessing, n_outcomes, n_settings):
    """``E_{a|x} = sum_l P(a|x,l) G_l`` for a parent instrument ``parent[l]``.

    ``postprocessing[x][l][a]`` is a conditional distribution over ``a``.
    """
    P = np.asarray(postprocessing, dtype=float)
    if P.shape != (n_settings, len(parent), n_outcomes):
        raise ShapeError("post-processing must have shape (n_settings, n_parent, n_outcomes)")
    if np.any(P < -1e-12) or np.max(np.abs(P.sum(axis=2) - 1)) > 1e-12:
        raise ValidationError("post-processing is not a conditional distribution")
    filters = {}
    for x in range(n_settings):
        for a in range(n_outcomes):
            J = sum(P[x, l, a] * g.choi for l, g in enumerate(parent))
            filters[(a, x)] = Channel(J, parent[0].d_in, parent[0].d_out)
    return InstrumentFamily(filters, n_outcomes, n_settings)


def extend_with_ancilla(fam: InstrumentFamily, d_env=None):
    """The family ``{E_{a|x} (x) id_E}`` with ``d_E = d_in`` by default."""
    d_env = fam.d_in if d_env is None else d_env
    ident = identity_channel(d_env)
    return fam.map_filters(lambda ch: tensor(ch, ident))


# --------------------------------------------------------------------------
# assemblages


class Assemblage:
    """Sub-normalised states ``sigma[x, a]`` with a common reduced state."""

    def __init__(self, sigma, validate=True, tol=1e-9):
        s = np.asarray(sigma, dtype=complex)
        if s.ndim != 4 or s.shape[2] != s.shape[3]:
            raise ShapeError(f"assemblage array must be (n_x, n_a, d, d), got {s.shape}")
        self.sigma = herm(s)
        if validate:
            self.validate(tol)

    def validate(self, tol=1e-9):
        herr = np.max(np.abs(self.sigma - np.swapaxes(self.sigma, -1, -2).conj())) if self.sigma.size else 0
        if herr > 1e-10:
            raise ValidationError("assemblage members must be Hermitian")
        for x in range(self.n_settings):
            for a in range(self.n_outcomes):
                if min_eigenvalue(self.sigma[x, a]) < -DEFAULT.tol_psd:
                    raise ValidationError(f"member ({a}|{x}) is not positive semidefinite")
        red = self.sigma.sum(axis=1)
        for x in range(1, self.n_settings):
            if trace_norm(red[x] - red[0]) > tol:
                raise ValidationError("reduced state differs between settings")
        if abs(np.trace(red[0]).real - 1) > tol:
            raise ValidationError("assemblage is not normalised")

    @property
    def n_settings(self):
        return self.sigma.shape[0]

    @property
    def n_outcomes(self):
        return self.sigma.shape[1]

    @property
    def dim(self):
        return self.sigma.shape[2]

    @property
    def probs(self):
        """``p[x, a] = tr sigma_{a|x}``."""
        return np.real(np.einsum("xaii->xa", self.sigma))

    @property
    def reduced(self):
        return self.sigma[0].sum(axis=0)

    def __getitem__(self, key):
        a, x = key
        return self.sigma[x, a]

    def mix(self, other, lam):
        """``lam * self + (1 - lam) * other``."""
        return Assemblage(lam * self.sigma + (1 - lam) * other.sigma)

    def relabel(self, perms):
        """Permute outcomes: new ``sigma[x, perms[x][a]] = sigma[x, a]``."""
        out = np.empty_like(self.sigma)
        for x, perm in enumerate(perms):
            for a, b in enumerate(perm):
                out[x, b] = self.sigma[x, a]
        return Assemblage(out)

    def distance(self, other):
        """Summed trace norm ``sum_{a,x} ||sigma_{a|x} - tau_{a|x}||_1``."""
        return float(sum(trace_norm(d) for d in (self.sigma - other.sigma).reshape(-1, self.dim, self.dim)))


def flat_assemblage(probs, gamma):
    p = np.asarray(probs, dtype=float)
    return Assemblage(p[:, :, None, None] * np.asarray(gamma, dtype=complex)[None, None])


def apply_instrument(fam: InstrumentFamily, rho, allow_distinct_reduced=False):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (fam.d_in, fam.d_in):
        raise ShapeError(f"state of shape {rho.shape} for a family on dimension {fam.d_in}")
    s = np.array([[fam[(a, x)](rho) for a in range(fam.n_outcomes)]
                  for x in range(fam.n_settings)])
    return Assemblage(s, validate=not allow_distinct_reduced)


def pauli_assemblage(visibility=1.0):
    """X/Z Pauli assemblage on ``I/2``, optionally mixed with white noise."""
    P = xz_projectors()
    v = float(visibility)
    s = np.array([[(v * P[x][a] + (1 - v) * I2 / 2) / 2 for a in range(2)] for x in range(2)])
    return Assemblage(s)


# --------------------------------------------------------------------------
# JSON


def mat_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def mat_from_json(rows):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 2:
        return arr.astype(complex)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ShapeError("matrices are encoded as rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_json(ch: Channel):
    return {"d_in": ch.d_in, "d_out": ch.d_out, "choi": mat_to_json(ch.choi)}


def channel_from_json(obj):
    return Channel(mat_from_json(obj["choi"]), obj["d_in"], obj["d_out"])


def family_to_json(fam: InstrumentFamily):
    return {
        "n_outcomes": fam.n_outcomes,
        "n_settings": fam.n_settings,
        "filters": {f"{a}|{x}": channel_to_json(ch) for (a, x), ch in sorted(fam.filters.items())},
    }


def _key(s):
    a, x = s.split("|")
    return int(a), int(x)


def family_from_json(obj):
    filters = {_key(k): channel_from_json(v) for k, v in obj["filters"].items()}
    return InstrumentFamily(filters, obj["n_outcomes"], obj["n_settings"])


def assemblage_to_json(sa: Assemblage):
    return {
        "n_outcomes": sa.n_outcomes,
        "n_settings": sa.n_settings,
        "members": {f"{a}|{x}": mat_to_json(sa.sigma[x, a])
                    for x in range(sa.n_settings) for a in range(sa.n_outcomes)},
    }


def assemblage_from_json(obj):
    n_a, n_x = obj["n_outcomes"], obj["n_settings"]
    mem = {_key(k): mat_from_json(v) for k, v in obj["members"].items()}
    return Assemblage(np.array([[mem[(a, x)] for a in range(n_a)] for x in range(n_x)]))
