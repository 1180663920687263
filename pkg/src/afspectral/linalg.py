"""Dense complex linear algebra used by every other module.

All operators are plain ``numpy.ndarray`` with complex entries; matrices are
row-major 2-d arrays.  Norms are exact (full SVD), eigendecompositions use the
Hermitian solver, and orthonormalization runs against a caller-supplied inner
product so the same routine serves matrix algebras and function spaces.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, InvalidInputError


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances.

    structural   : exact operator identities (projections, homomorphisms)
    optimization : solver objective accuracy
    gram_pivot   : smallest acceptable Gram-Schmidt pivot
    hermitian    : relative asymmetry allowed in Hermitian inputs
    iso_residual : Dirac commutation residual below which a verdict is "in"
    iso_ambiguous: upper edge of the guard band above iso_residual
    crossed      : residual bound for group-window identities
    """

    structural: float = 1e-10
    optimization: float = 1e-6
    gram_pivot: float = 1e-10
    hermitian: float = 1e-12
    iso_residual: float = 1e-9
    iso_ambiguous: float = 1e-3
    crossed: float = 1e-10


TOL = Tolerances()


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def operator_norm(m) -> float:
    """Largest singular value of a (possibly rectangular) matrix."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def hermitian_eig(m):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and unitary ``v``
    satisfying ``m @ v = v @ diag(w)``.  Raises :class:`InvalidInputError`
    when the input is not Hermitian to relative tolerance ``TOL.hermitian``.
    """
    a = as_matrix(m)
    scale = max(operator_norm(a), 1.0)
    if operator_norm(a - adjoint(a)) > TOL.hermitian * scale:
        raise InvalidInputError("matrix is not Hermitian")
    w, v = np.linalg.eigh(a)
    return w, v


def kron(a, b) -> np.ndarray:
    """Kronecker product; (i*rB+k, j*cB+l) entry is A[i,j]*B[k,l]."""
    return np.kron(as_matrix(a), as_matrix(b))


def orthonormalize(vectors, gram):
    """Gram-Schmidt against the inner product callback ``gram(a, b)``.

    ``gram`` must be linear in its second argument and conjugate-linear in the
    first.  The output spans the same space, has identity Gram matrix, and
    keeps the direction of the first vector.  A pivot below
    ``TOL.gram_pivot`` raises :class:`DegeneracyError`.
    """
    out = []
    for k, vec in enumerate(vectors):
        w = np.array(vec, dtype=complex)
        # two MGS passes for numerical stability
        for _ in range(2):
            for f in out:
                w = w - gram(f, w) * f
        nrm2 = gram(w, w)
        if abs(nrm2.imag) > 1e-8 * max(1.0, abs(nrm2)):
            raise InvalidInputError("inner product is not positive (complex norm)")
        piv = float(np.sqrt(max(nrm2.real, 0.0)))
        if piv < TOL.gram_pivot:
            raise DegeneracyError(f"vector {k} numerically dependent (pivot {piv:.3e})")
        out.append(w / piv)
    return out


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary from a QR factorization."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
