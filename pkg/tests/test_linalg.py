import numpy as np
import pytest

from afspectral import algebra as al
from afspectral.errors import DegeneracyError, InvalidInputError
from afspectral.linalg import (
    hermitian_eig,
    kron,
    operator_norm,
    orthonormalize,
    random_unitary,
)

SIGMA = al.slot_basis(2)


def test_operator_norm_diagonal():
    assert operator_norm(np.diag([2.0, -3.0, 1.0])) == pytest.approx(3.0, abs=1e-12)


def test_operator_norm_rank_one():
    m = np.array([[0.0, np.sqrt(2.0)], [0.0, 0.0]])
    assert operator_norm(m) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_operator_norm_kron_multiplicative(rng):
    # oracle: full SVD of the Kronecker product itself
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    direct = operator_norm(kron(a, b))
    assert direct == pytest.approx(operator_norm(a) * operator_norm(b), abs=1e-10)


def test_operator_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        operator_norm(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_operator_norm_unitary_invariance(rng):
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    u = random_unitary(5, rng)
    v = random_unitary(5, rng)
    assert operator_norm(u @ m @ v) == pytest.approx(operator_norm(m), abs=1e-10)
    assert operator_norm(np.conj(m).T) == pytest.approx(operator_norm(m), abs=1e-12)
    assert operator_norm(2.5j * m) == pytest.approx(2.5 * operator_norm(m), abs=1e-10)


def test_hermitian_eig_identity():
    w, v = hermitian_eig(np.eye(4))
    assert np.allclose(w, 1.0)
    assert np.allclose(v @ np.conj(v).T, np.eye(4), atol=1e-12)


def test_hermitian_eig_pauli():
    w, _ = hermitian_eig(SIGMA[0])
    assert np.allclose(w, [-1.0, 1.0], atol=1e-12)


def test_hermitian_eig_reconstruction(rng):
    z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = z + np.conj(z).T
    w, v = hermitian_eig(m)
    assert np.all(np.diff(w) >= -1e-12)
    assert operator_norm(v @ np.diag(w) @ np.conj(v).T - m) < 1e-10
    assert operator_norm(v @ np.conj(v).T - np.eye(8)) < 1e-10


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    d = np.diag(kron(SIGMA[2], SIGMA[2])).real
    assert np.allclose(d, [1.0, -1.0, -1.0, 1.0])


def test_kron_associativity(rng):
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-14


def _gram(rho):
    return lambda a, b: complex(np.trace(rho @ np.conj(a).T @ b))


def test_orthonormalize_fixed_point():
    # an already orthonormal family comes back unchanged
    rho = np.eye(2) / 2.0
    out = orthonormalize(list(SIGMA), _gram(rho))
    for a, b in zip(out, SIGMA):
        assert np.max(np.abs(a - b)) < 1e-12


def test_orthonormalize_weighted_state():
    rho = np.diag([0.75, 0.25])
    one = np.eye(2, dtype=complex)
    out = orthonormalize([one, SIGMA[2]], _gram(rho))
    # frozen by hand: f2 = (sigma_3 - 1/2) / sqrt(3/4)
    expected = (SIGMA[2] - 0.5 * one) / np.sqrt(0.75)
    assert np.max(np.abs(out[1] - expected)) < 1e-12
    g = np.array([[_gram(rho)(a, b) for b in out] for a in out])
    assert np.max(np.abs(g - np.eye(2))) < 1e-10


def test_orthonormalize_haar_depth2():
    h = al._haar_stack(2)
    weights = np.full(4, 0.25)
    gram = lambda a, b: complex(np.sum(weights * np.conj(a) * b))
    out = orthonormalize([row.astype(complex) for row in h], gram)
    g = np.array([[gram(a, b) for b in out] for a in out])
    assert np.max(np.abs(g - np.eye(4))) < 1e-10


def test_orthonormalize_degenerate_input():
    one = np.eye(2, dtype=complex)
    with pytest.raises(DegeneracyError):
        orthonormalize([one, 1.0000000001 * one], _gram(np.eye(2) / 2.0))


def test_commutator_spectrum_real_for_selfadjoint(uhf3, rng):
    # i [D, x] is Hermitian when x is self-adjoint
    x = al.AlgebraElement(al.uhf(2, 3), 2, rng.normal(size=16))
    w, _ = hermitian_eig(1j * uhf3.commutator(x))
    assert np.max(np.abs(w.imag)) if np.iscomplexobj(w) else True
    assert np.all(np.isreal(w))
