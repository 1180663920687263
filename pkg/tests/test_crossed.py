import numpy as np
import pytest

from afspectral import algebra as al
from afspectral import crossed as cx
from afspectral import isometry as iso
from afspectral import triple as tr
from afspectral.errors import (
    InvalidInputError,
    PreconditionError,
    WindowTooSmallError,
)
from afspectral.linalg import operator_norm

from conftest import random_element

C3 = al.cantor(3)
F2 = al.uhf(2, 2)
CHI5 = complex(np.exp(2j * np.pi / 5))


@pytest.fixture(scope="module")
def odo_lift():
    base = tr.build_triple(C3, al.UniformState(), tr.dirac_explicit([1.0, 2.0, 4.0]))
    return cx.build_lifted(base, cx.OdometerAction(), radius=4, margin=2)


@pytest.fixture(scope="module")
def triv_lift():
    base = tr.build_triple(F2, al.TraceState(), tr.dirac_explicit([1.0, 2.0]))
    return cx.build_lifted(base, cx.TrivialAction(), radius=4, margin=2)


def test_dimensions():
    base = tr.build_triple(al.cantor(2), al.UniformState(), tr.dirac_explicit([1.0, 2.0]))
    lifted = cx.build_lifted(base, cx.TrivialAction(), radius=3, margin=1)
    assert lifted.dim == 2 * 4 * 7 == 56


def test_dirac_block_structure(odo_lift):
    d = odo_lift.d_l
    assert operator_norm(d - np.conj(d).T) < 1e-12
    half = odo_lift.half_dim
    grading = np.diag([1.0] * half + [-1.0] * half).astype(complex)
    assert operator_norm(d @ grading + grading @ d) < 1e-12
    ev = np.linalg.eigvalsh(d)
    assert np.allclose(np.sort(ev), np.sort(-ev), atol=1e-10)


def test_dirac_square_block_diagonal(odo_lift):
    d2 = odo_lift.d_l @ odo_lift.d_l
    half = odo_lift.half_dim
    assert operator_norm(d2[:half, half:]) < 1e-12
    assert operator_norm(d2[half:, :half]) < 1e-12
    base_sq = np.kron(
        np.eye(odo_lift.window.size, dtype=complex),
        np.diag(odo_lift.base.d_diag**2).astype(complex),
    )
    expected = base_sq + odo_lift.m_l @ odo_lift.m_l
    assert operator_norm(d2[:half, :half] - expected) < 1e-12


def test_action_verification_rejects_non_rigid():
    base3 = tr.build_triple(F2, al.TraceState(), tr.dirac_explicit([1.0, 2.0]))
    bad = cx.IsoPowerAction(iso.switch(1, 2, 2))
    with pytest.raises(InvalidInputError):
        cx.build_lifted(base3, bad, radius=3, margin=1)


def test_odometer_preserves_every_level(odo_lift):
    assert odo_lift.action_report["verified"]
    assert all(odo_lift.action_report["filtration_levels"])


def test_represent_trivial_lambda0(triv_lift, rng):
    a = random_element(F2, 2, rng)
    op = cx.represent_crossed(triv_lift, cx.CrossedElement({0: a}))
    expected = np.kron(
        np.eye(triv_lift.window.size, dtype=complex), triv_lift.base.represent(a)
    )
    assert operator_norm(op - expected) < 1e-12


def test_represent_lambda1_shifts_sites(odo_lift):
    one = al.identity_element(C3, 0).embed(3)
    op = cx.represent_crossed(odo_lift, cx.CrossedElement({1: one}))
    d = odo_lift.base.dim
    rows, cols = odo_lift.site_block(0, -1)
    assert operator_norm(op[rows, cols] - np.eye(d)) < 1e-12
    rows, cols = odo_lift.site_block(-1, 0)
    assert operator_norm(op[rows, cols]) < 1e-14


def test_covariance_of_representation(odo_lift, rng):
    a = random_element(C3, 3, rng)
    lam1 = cx.CrossedElement({1: al.identity_element(C3, 0).embed(3)})
    pa = cx.represent_crossed(odo_lift, cx.CrossedElement({0: a}))
    pl = cx.represent_crossed(odo_lift, lam1)
    shifted = cx.represent_crossed(
        odo_lift, cx.CrossedElement({0: cx.apply_action(cx.OdometerAction(), 1, a)})
    )
    mask = odo_lift.interior_columns()
    resid = operator_norm((pl @ pa @ np.conj(pl).T - shifted)[:, mask])
    assert resid < 1e-12


def test_window_too_small(odo_lift, rng):
    wide = cx.CrossedElement({3: random_element(C3, 3, rng)})
    with pytest.raises(WindowTooSmallError):
        cx.represent_crossed(odo_lift, wide)
    with pytest.raises(WindowTooSmallError):
        cx.GroupWindow(2, 2)


def test_cocycle_identity():
    c = cx.Cocycle(CHI5)
    for g in range(-6, 7):
        for h in range(-6, 7):
            assert c.value(g + h) == pytest.approx(c.value(g) * c.value(h), abs=1e-12)
    with pytest.raises(InvalidInputError):
        cx.Cocycle(2.0)


def test_lifted_unitary_identity_parameters(odo_lift):
    u = cx.lifted_unitary(odo_lift, cx.Cocycle(1.0), None, "id")
    assert operator_norm(u - np.eye(odo_lift.half_dim)) < 1e-12


def test_lifted_unitary_is_unitary(triv_lift, rng):
    beta = iso.random_local_automorphism(F2, rng)
    u = cx.lifted_unitary(triv_lift, cx.Cocycle(CHI5), beta, "id")
    assert operator_norm(np.conj(u).T @ u - np.eye(triv_lift.half_dim)) < 1e-10
    assert operator_norm(u @ triv_lift.m_l - triv_lift.m_l @ u) < 1e-12


def test_lifted_unitary_intertwining_guard(odo_lift, rng):
    # a generic portrait does not commute with the odometer
    bad = iso.TreePortrait(3, (0, 1, 0, 0, 0, 0, 0))
    with pytest.raises(PreconditionError):
        cx.lifted_unitary(odo_lift, cx.Cocycle(1.0), bad, "id")


def test_commutation_positive_cases(odo_lift, triv_lift, rng):
    cases = [
        (odo_lift, cx.Cocycle(1.0), None, "id"),
        (odo_lift, cx.Cocycle(1j), iso.odometer_portrait(3), "id"),
        (triv_lift, cx.Cocycle(CHI5), iso.random_local_automorphism(F2, rng), "id"),
    ]
    for lifted, coc, beta, sigma in cases:
        u = cx.lifted_unitary(lifted, coc, beta, sigma)
        rep = cx.lift_commutation_check(lifted, u)
        assert rep["passes"], rep


def test_commutation_negative_controls(triv_lift):
    # sigma = negation flips the site label: must fail loudly
    u_neg = cx.lifted_unitary(triv_lift, cx.Cocycle(1.0), None, "neg")
    rep = cx.lift_commutation_check(triv_lift, u_neg)
    assert not rep["passes"] and rep["residual"] > 0.1
    # beta outside the rigid group must fail too
    u_sw = cx.lifted_unitary(
        triv_lift, cx.Cocycle(1.0), iso.switch(1, 2, 2), "id", check_rigidity=False
    )
    rep = cx.lift_commutation_check(triv_lift, u_sw)
    assert not rep["passes"] and rep["residual"] > 0.1
    with pytest.raises(PreconditionError):
        cx.lifted_unitary(triv_lift, cx.Cocycle(1.0), iso.switch(1, 2, 2), "id")


def test_covariance_identity_parameters(triv_lift, rng):
    x = cx.CrossedElement({0: random_element(F2, 2, rng)})
    rep = cx.covariance_check(triv_lift, cx.Cocycle(1.0), None, "id", x)
    assert rep["residual"] == 0.0


def test_covariance_odometer(odo_lift, rng):
    x = cx.CrossedElement({1: random_element(C3, 3, rng)})
    rep = cx.covariance_check(odo_lift, cx.Cocycle(1j), None, "id", x)
    assert rep["passes"] and rep["residual"] < 1e-10


def test_covariance_generic_support(triv_lift, rng):
    x = cx.CrossedElement({g: random_element(F2, 2, rng) for g in (-2, -1, 0, 1, 2)})
    rep = cx.covariance_check(
        triv_lift, cx.Cocycle(CHI5), iso.random_local_automorphism(F2, rng), "id", x
    )
    assert rep["passes"], rep


def test_covariance_negation_still_implements(triv_lift, rng):
    # sigma = neg fails commutation but the unitary still implements the map
    x = cx.CrossedElement({g: random_element(F2, 2, rng) for g in (-1, 2)})
    rep = cx.covariance_check(triv_lift, cx.Cocycle(CHI5), None, "neg", x)
    assert rep["passes"], rep


def test_lifted_group_law(odo_lift):
    odo = iso.odometer_portrait(3)
    u1 = cx.lifted_unitary(odo_lift, cx.Cocycle(1j), odo, "id")
    u2 = cx.lifted_unitary(odo_lift, cx.Cocycle(CHI5), odo, "id")
    combined = cx.lifted_unitary(
        odo_lift, cx.Cocycle(1j * CHI5), iso.compose_portraits(odo, odo), "id"
    )
    assert operator_norm(u1 @ u2 - combined) < 1e-10


def test_crossed_element_star_algebra(odo_lift, rng):
    action = cx.OdometerAction()
    x = cx.CrossedElement({g: random_element(C3, 3, rng) for g in (-1, 0, 1)})
    mask = odo_lift.interior_columns()
    adj_resid = operator_norm(
        (cx.represent_crossed(odo_lift, x.adjoint(action))
         - np.conj(cx.represent_crossed(odo_lift, x)).T)[:, mask]
    )
    assert adj_resid < 1e-10
    base = odo_lift.base
    wide = cx.build_lifted(base, action, radius=6, margin=4)
    prod = x.multiply(x, action)
    resid = operator_norm(
        (cx.represent_crossed(wide, prod)
         - cx.represent_crossed(wide, x) @ cx.represent_crossed(wide, x))[
            :, wide.interior_columns()
        ]
    )
    assert resid < 1e-10


def test_stability_lambda0(odo_lift, rng):
    a = random_element(C3, 3, rng)
    x = cx.CrossedElement({0: a})
    rep = cx.crossed_commutator_stability(odo_lift.base, cx.OdometerAction(), x)
    assert rep["stabilized"]
    assert max(rep["differences"], default=0.0) < 1e-10
    assert rep["norms"][0] == pytest.approx(odo_lift.base.commutator_norm(a), abs=1e-10)


def test_stability_pure_shift(odo_lift):
    one = al.identity_element(C3, 0).embed(3)
    rep = cx.crossed_commutator_stability(odo_lift.base, cx.OdometerAction(),
                                          cx.CrossedElement({1: one}))
    assert rep["stabilized"]
    assert all(abs(v - 1.0) < 1e-10 for v in rep["norms"])


def test_stability_zero_element(odo_lift):
    zero = al.AlgebraElement(C3, 3, np.zeros(8))
    rep = cx.crossed_commutator_stability(odo_lift.base, cx.OdometerAction(),
                                          cx.CrossedElement({0: zero}))
    assert all(v == 0.0 for v in rep["norms"])


def test_iso_power_action_lifts(rng):
    # integer action generated by a rigid tensor-slot automorphism
    base = tr.build_triple(F2, al.TraceState(), tr.dirac_explicit([1.0, 2.0]))
    gen = iso.random_local_automorphism(F2, rng)
    action = cx.IsoPowerAction(gen)
    lifted = cx.build_lifted(base, action, radius=3, margin=1)
    assert lifted.action_report["verified"]
    # the generator commutes with its own powers, so it lifts with sigma = id
    u = cx.lifted_unitary(lifted, cx.Cocycle(CHI5), gen, "id")
    assert cx.lift_commutation_check(lifted, u)["passes"]
    x = cx.CrossedElement({-1: random_element(F2, 2, rng), 1: random_element(F2, 2, rng)})
    rep = cx.covariance_check(lifted, cx.Cocycle(1j), gen, "id", x)
    assert rep["passes"], rep
