import numpy as np
import pytest

from afspectral import algebra as al
from afspectral import triple as tr
from afspectral.errors import DegeneracyError, InvalidInputError
from afspectral.linalg import operator_norm

from conftest import random_element

F1 = al.uhf(2, 1)
F3 = al.uhf(2, 3)
C2 = al.cantor(2)


def test_dirac_spec_flags():
    d = tr.dirac_explicit([1, 2, 4])
    assert d.lambdas[0] == 0.0
    assert d.strictly_increasing and d.pairwise_distinct and d.nondecreasing
    tied = tr.dirac_explicit([1, 1, 2])
    assert tied.nondecreasing and not tied.pairwise_distinct
    assert np.allclose(tr.dirac_geometric(1 / 3, 3).lambdas, (0.0, 1.0, 3.0, 9.0))
    assert tr.dirac_power(3.0, 3).lambdas == (0.0, 1.0, 3.0, 9.0)
    with pytest.raises(InvalidInputError):
        tr.dirac_explicit([1, -2])
    with pytest.raises(InvalidInputError):
        tr.dirac_geometric(1.5, 2)


def test_dirac_diagonal_level1(uhf1):
    # grade-major order (identity, sigma_1, sigma_2, sigma_3)
    assert np.allclose(uhf1.d_diag, [0.0, 1.0, 1.0, 1.0])


def test_cantor_multiplicities():
    t = tr.build_triple(C2, al.UniformState(), tr.dirac_explicit([1.0, 3.0]))
    counts = {lam: int(np.sum(t.d_diag == lam)) for lam in (0.0, 1.0, 3.0)}
    assert counts == {0.0: 1, 1.0: 1, 3.0: 2}


def test_trace_of_dirac(uhf3):
    lam = uhf3.lambdas
    grades = uhf3.gns.grades
    expected = sum(lam[n] * int(np.sum(grades == n)) for n in range(4))
    assert np.trace(uhf3.D).real == pytest.approx(expected, abs=1e-12)


def test_represent_identity(uhf3):
    one = al.identity_element(F3, 0)
    assert operator_norm(uhf3.represent(one) - np.eye(uhf3.dim)) < 1e-12


def test_represent_involution(uhf1):
    p = uhf1.represent(al.basis_element(F1, 1, (3,)))
    assert operator_norm(p @ p - np.eye(4)) < 1e-12


def test_represent_homomorphism(uhf3, rng):
    for _ in range(100):
        a = random_element(F3, 2, rng)
        b = random_element(F3, 2, rng)
        pa, pb = uhf3.represent(a), uhf3.represent(b)
        assert operator_norm(uhf3.represent(a * b) - pa @ pb) < 1e-10
        assert operator_norm(uhf3.represent(a.adjoint()) - np.conj(pa).T) < 1e-12


def test_represent_reproduces_coefficients(uhf3, rng):
    a = random_element(F3, 3, rng)
    assert np.allclose(uhf3.vector_of(a), a.coeffs, atol=1e-12)


def test_commutator_of_identity(uhf3):
    one = al.identity_element(F3, 0)
    assert operator_norm(uhf3.commutator(one)) < 1e-14


def test_commutator_scaling_worked_example(uhf1):
    """||[D, beta sigma_3]|| = |beta| lambda_1."""
    s3 = al.basis_element(F1, 1, (3,))
    for beta in (1.0, -0.35, 2.0 + 1.5j):
        val = uhf1.commutator_norm(beta * s3)
        assert val == pytest.approx(abs(beta) * 1.0, abs=1e-10)


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("l", [1, 2, 3])
def test_commutator_matched_words(uhf3, n, l):
    """||[D, 1^n (x) sigma_l]|| = lambda_{n+1}."""
    e = al.basis_element(F3, n + 1, (4,) * n + (l,))
    assert uhf3.commutator_norm(e) == pytest.approx(uhf3.lambdas[n + 1], abs=1e-10)


def test_block_norms_sigma3(uhf1):
    bn = uhf1.block_norms(al.basis_element(F1, 1, (3,)))
    assert bn[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert bn[1, 0] == pytest.approx(1.0, abs=1e-12)


def test_commutator_diagonal_blocks_vanish(uhf3, rng):
    # every grade-diagonal block of [D, a] vanishes; in particular (n+1, n+1)
    x = random_element(F3, 2, rng)
    comm = uhf3.commutator(x)
    for n in range(4):
        mask = uhf3.grade_mask(n)
        assert np.max(np.abs(comm[np.ix_(mask, mask)]), initial=0.0) < 1e-12


def test_deep_projections_commute_with_shallow_elements(uhf3, rng):
    # x in A_n commutes with Q_k for k > n
    x = random_element(F3, 1, rng)
    px = uhf3.represent(x)
    for k in (2, 3):
        q = uhf3.Q(k)
        assert operator_norm(q @ px - px @ q) < 1e-12


def test_commutator_reconstruction_from_blocks(uhf3, rng):
    x = random_element(F3, 3, rng)
    direct = uhf3.commutator(x)
    assert operator_norm(direct - uhf3.commutator_from_blocks(x)) < 1e-12


def test_locality(uhf3, rng):
    # a in A_n gives [D, pi(a)] = P_n [D, pi(a)] P_n
    x = random_element(F3, 2, rng)
    comm = uhf3.commutator(x)
    p = uhf3.P(2)
    assert operator_norm(comm - p @ comm @ p) < 1e-12


def test_commutator_norm_truncation_independent(uhf3, uhf4, rng):
    x3 = random_element(F3, 2, rng)
    x4 = al.AlgebraElement(al.uhf(2, 4), 2, x3.coeffs)
    assert uhf3.commutator_norm(x3) == pytest.approx(uhf4.commutator_norm(x4), abs=1e-9)


def test_spectral_projection_identity(uhf3):
    for n in range(4):
        q = uhf3.Q(n)
        assert operator_norm(uhf3.D @ q - uhf3.lambdas[n] * q) < 1e-12
    total = sum(uhf3.Q(n) for n in range(4))
    assert operator_norm(total - np.eye(uhf3.dim)) < 1e-14


def test_projection_algebra_exact(uhf3):
    for i in range(4):
        qi = uhf3.Q(i)
        for j in range(4):
            prod = qi @ uhf3.Q(j)
            expected = qi if i == j else 0 * qi
            assert np.array_equal(prod, expected)


def test_flip_commutator_identity(rng):
    # on C^2: [D, U* a U] = -U* [D, a] U exactly
    d = np.diag([0.0, 1.0]).astype(complex)
    u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    for _ in range(100):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lhs = d @ (np.conj(u).T @ a @ u) - (np.conj(u).T @ a @ u) @ d
        rhs = -np.conj(u).T @ (d @ a - a @ d) @ u
        assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_build_triple_rejects_nonfaithful():
    with pytest.raises(DegeneracyError):
        tr.build_triple(F1, al.VectorState(al.basis_element(F1, 1, (3,))), tr.dirac_explicit([1.0]))
    rho_singular = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegeneracyError):
        tr.build_triple(
            al.uhf(2, 2), al.ProductState([rho_singular] * 2), tr.dirac_explicit([1, 2])
        )


def test_build_triple_family_mismatch():
    with pytest.raises(InvalidInputError):
        tr.build_triple(C2, al.TraceState(), tr.dirac_explicit([1, 2]))
    with pytest.raises(InvalidInputError):
        tr.build_triple(F1, al.UniformState(), tr.dirac_explicit([1.0]))


def test_product_state_gns(rng):
    rho = np.array([[0.75, 0.0], [0.0, 0.25]])
    state = al.ProductState([rho, rho])
    f2 = al.uhf(2, 2)
    t = tr.build_triple(f2, state, tr.dirac_explicit([1.0, 2.0]))
    # Gram identity of the orthonormalized graded basis
    basis = t.gns.basis_elements
    gram = np.array(
        [[state.value(a.adjoint() * b) for b in basis] for a in basis]
    )
    assert np.max(np.abs(gram - np.eye(16))) < 1e-10
    # grades still block the Dirac
    assert np.allclose(np.sort(np.unique(t.d_diag)), [0.0, 1.0, 2.0])
    # representation is still a homomorphism
    for _ in range(30):
        a = random_element(f2, 2, rng)
        b = random_element(f2, 2, rng)
        assert operator_norm(t.represent(a * b) - t.represent(a) @ t.represent(b)) < 1e-9


def test_triple_serialization(uhf3):
    d = uhf3.to_dict()
    assert d["filtration"]["family"] == "uhf"
    assert d["dirac"]["lambdas"] == [0.0, 1.0, 2.0, 4.0]
    assert d["state"]["variant"] == "trace"


def test_factor_size_three_path(rng):
    # generic single-slot system beyond the k=2 case
    f = al.uhf(3, 1)
    t = tr.build_triple(f, al.TraceState(), tr.dirac_explicit([2.0]))
    assert t.dim == 9
    for j in range(1, 9):
        e = al.basis_element(f, 1, (j,))
        assert t.commutator_norm(e) == pytest.approx(2.0, abs=1e-10)
    for _ in range(10):
        a = random_element(f, 1, rng)
        b = random_element(f, 1, rng)
        assert operator_norm(t.represent(a * b) - t.represent(a) @ t.represent(b)) < 1e-10
