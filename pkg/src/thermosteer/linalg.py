"""Dense complex linear algebra on small Hermitian matrices.

Every operator in the package (states, Choi matrices, witnesses,
Hamiltonians) is a plain ``numpy.ndarray`` of complex dtype.  The helpers
here validate the Hermitian contract and provide the handful of matrix
functions the rest of the package needs.
"""
import numpy as np

from .config import DEFAULT
from .errors import DomainError, NumericalFailure, ShapeError, ValidationError


def as_hermitian(m, tol=DEFAULT.tol_herm):
    """Return ``m`` as a complex square array, checking Hermiticity.

    :param m: array-like square matrix.
    :param tol: largest allowed ``|m[i,j] - conj(m[j,i])|``.
    :raises ShapeError: if ``m`` is not square or empty.
    :raises ValidationError: if ``m`` is not Hermitian within ``tol`` or has
        non-finite entries.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ShapeError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    err = hermiticity_error(m)
    if err > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {err:.3e})")
    return m


def hermiticity_error(m):
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def herm(m):
    """Hermitian part ``(m + m^dagger) / 2``; works on stacks of matrices."""
    return 0.5 * (m + np.swapaxes(m, -1, -2).conj())


def eig_hermitian(m):
    """Eigendecomposition of a Hermitian matrix.

    :return: ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
        eigenvectors as the columns of a unitary matrix.
    :raises NumericalFailure: if LAPACK does not converge.
    """
    m = as_hermitian(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return w, v


def matrix_func(m, f):
    """Apply the scalar function ``f`` to the spectrum of ``m``.

    ``f`` must accept a real ndarray.  If it produces non-finite values
    (e.g. ``np.log`` on a non-positive eigenvalue) a DomainError is raised.
    """
    w, v = eig_hermitian(m)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w))
    if fw.shape != w.shape or not np.all(np.isfinite(fw)):
        raise DomainError("function undefined on the spectrum")
    if np.iscomplexobj(fw) and np.max(np.abs(fw.imag)) > 0:
        raise DomainError("function is not real on the spectrum")
    out = (v * np.real(fw)) @ v.conj().T
    return herm(out)


def expm_h(m):
    return matrix_func(m, np.exp)


def logm_h(m):
    w = np.linalg.eigvalsh(as_hermitian(m))
    if np.min(w) <= 0:
        raise DomainError("matrix logarithm needs a positive definite argument")
    return matrix_func(m, np.log)


def sqrtm_psd(m, tol=DEFAULT.tol_psd):
    """Square root of a positive semidefinite matrix; clips tiny negative eigenvalues."""
    w = np.linalg.eigvalsh(as_hermitian(m))
    if np.min(w) < -tol:
        raise DomainError("square root needs a positive semidefinite argument")
    return matrix_func(m, lambda x: np.sqrt(np.clip(x, 0.0, None)))


def kron(a, b):
    """Kronecker product with the row index ``i*dim(b) + k`` convention."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims, keep):
    """Partial trace of a bipartite operator.

    :param m: operator on ``A (x) B`` of shape ``(dA*dB, dA*dB)``.
    :param dims: pair ``(dA, dB)``.
    :param keep: ``"A"``/``0`` keeps the first factor, ``"B"``/``1`` the second.
    """
    dA, dB = (int(d) for d in dims)
    m = np.asarray(m, dtype=complex)
    if m.shape != (dA * dB, dA * dB):
        raise ShapeError(f"operator shape {m.shape} does not match dims {dims}")
    t = m.reshape(dA, dB, dA, dB)
    if keep in ("A", 0):
        return np.einsum("ijkj->ik", t)
    if keep in ("B", 1):
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def trace_norm(m):
    """Schatten-1 norm of a Hermitian matrix (sum of absolute eigenvalues)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(as_hermitian(m, tol=1e-9)))))


def min_eigenvalue(m):
    return float(np.linalg.eigvalsh(herm(np.asarray(m, dtype=complex)))[0])


def is_psd(m, tol=DEFAULT.tol_psd):
    return min_eigenvalue(m) >= -tol


def hermitian_basis(d):
    """Orthonormal basis of the real vector space of ``d x d`` Hermitian matrices.

    Returns an array of shape ``(d*d, d, d)``; ``tr(E_k E_l) = delta_kl``.
    """
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = s
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            basis.append(e)
    return np.array(basis)


def hermitian_coords(m):
    """Real coordinates of Hermitian ``m`` in :func:`hermitian_basis` order."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    off = m[iu] * np.sqrt(2.0)
    out = np.empty(d * d)
    out[:d] = np.real(np.diag(m))
    out[d::2] = off.real
    out[d + 1::2] = off.imag
    return out


def random_hermitian(d, rng, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * herm(g)


def random_unitary(d, rng):
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return herm(rho / np.trace(rho).real)
