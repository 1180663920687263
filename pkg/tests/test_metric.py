import numpy as np
import pytest

from afspectral import algebra as al
from afspectral import isometry as iso
from afspectral import metric as mt
from afspectral import triple as tr
from afspectral.errors import PreconditionError, UnsupportedError

from conftest import random_element

F1 = al.uhf(2, 1)
F3 = al.uhf(2, 3)
C3 = al.cantor(3)

FAST = mt.SolverConfig(starts=10, max_iter=300)


def _normalized_vector(filt, level, rng):
    v = random_element(filt, level, rng)
    nrm = al.TraceState().value(v.adjoint() * v)
    return v * (1.0 / np.sqrt(nrm.real))


# ---------------------------------------------------------------------------
# search-level reduction
# ---------------------------------------------------------------------------


def test_reduce_trace_vs_level1_vector(uhf3):
    v = mt.car_vector(F3, 3)
    p = mt.DistanceProblem(uhf3, al.TraceState(), al.VectorState(v))
    assert mt.reduce_search_level(p).search_level == 1


def test_reduce_trace_vs_trace(uhf3):
    p = mt.reduce_search_level(mt.DistanceProblem(uhf3, al.TraceState(), al.TraceState()))
    assert p.search_level == 0
    res = mt.distance(p)
    assert res.lower_bound == 0.0 and res.upper_bound == 0.0


def test_reduce_characters_keep_full_depth(cantor3):
    p = mt.DistanceProblem(cantor3, al.CharacterState((0, 0, 0)), al.CharacterState((1, 0, 1)))
    assert mt.reduce_search_level(p).search_level == 3


def test_reduction_preserves_value(uhf3, rng):
    v = _normalized_vector(F3, 2, rng)
    phi = al.VectorState(v)
    reduced = mt.reduce_search_level(mt.DistanceProblem(uhf3, phi, al.TraceState()))
    assert reduced.search_level == 2
    d_red = mt.distance(reduced, FAST).lower_bound
    d_full = mt.distance(
        mt.DistanceProblem(uhf3, phi, al.TraceState(), search_level=3), FAST
    ).lower_bound
    assert d_red == pytest.approx(d_full, abs=1e-7)


def test_no_reduction_for_product_reference(rng):
    rho = np.array([[0.7, 0.0], [0.0, 0.3]])
    f2 = al.uhf(2, 2)
    t = tr.build_triple(f2, al.ProductState([rho, rho]), tr.dirac_explicit([1, 2]))
    p = mt.DistanceProblem(t, al.TraceState(), al.VectorState(mt.car_vector(f2, 3)))
    assert mt.reduce_search_level(p).search_level == 2  # unchanged


# ---------------------------------------------------------------------------
# golden distances
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("lam", [[1.0], [2.5], [0.7]])
def test_worked_example_distance(lam):
    """d(phi_v, trace) = 1/lambda_1 for the matched level-1 vector."""
    rec = mt.car_golden_case(lam, 0, 3)
    assert rec["upper_bound"] == 1.0 / lam[0]
    assert rec["lower_bound"] >= rec["upper_bound"] - 1e-6
    assert rec["lower_bound"] <= rec["upper_bound"] + 1e-9


def test_golden_case_search_level():
    rec = mt.car_golden_case([1.0, 2.0], 1, 2)
    assert rec["search_level"] == 2
    assert rec["upper_bound"] == 0.5


def test_distance_result_witness_is_feasible(uhf3):
    v = al.shift_embed(mt.car_vector(F3, 1), 1)
    p = mt.reduce_search_level(mt.DistanceProblem(uhf3, al.VectorState(v), al.TraceState()))
    res = mt.distance(p, FAST)
    assert uhf3.commutator_norm(res.witness) <= 1.0 + 1e-9
    attained = abs(
        complex(al.VectorState(v).value(res.witness) - al.TraceState().value(res.witness))
    )
    assert attained >= res.lower_bound - 1e-9


def test_distance_symmetry(cantor3):
    s1, s2 = al.CharacterState((0, 1, 0)), al.CharacterState((1, 1, 0))
    d12 = mt.distance(mt.reduce_search_level(mt.DistanceProblem(cantor3, s1, s2)), FAST)
    d21 = mt.distance(mt.reduce_search_level(mt.DistanceProblem(cantor3, s2, s1)), FAST)
    assert d12.lower_bound == pytest.approx(d21.lower_bound, abs=2e-6)


def test_constraint_homogeneity(uhf3, rng):
    p = mt.DistanceProblem(uhf3, al.TraceState(), al.VectorState(mt.car_vector(F3, 3)))
    c, B, _ = mt._search_space(p)
    cons = mt._ConstraintMap(B)
    t = rng.normal(size=len(c))
    assert cons.norm(2.0 * t) == pytest.approx(2.0 * cons.norm(t), rel=1e-13)
    assert cons.norm(-t) == pytest.approx(cons.norm(t), rel=1e-13)


def test_parameter_cap(uhf3):
    p = mt.DistanceProblem(uhf3, al.TraceState(), al.VectorState(mt.car_vector(F3, 3)))
    with pytest.raises(UnsupportedError):
        mt.distance(p, mt.SolverConfig(param_cap=5))


def test_solver_determinism(uhf3, rng):
    v = _normalized_vector(F3, 2, rng)
    p = mt.reduce_search_level(mt.DistanceProblem(uhf3, al.VectorState(v), al.TraceState()))
    r1 = mt.distance(p, mt.SolverConfig(starts=8, seed=42))
    r2 = mt.distance(p, mt.SolverConfig(starts=8, seed=42))
    assert r1.lower_bound == r2.lower_bound
    assert np.array_equal(r1.witness.coeffs, r2.witness.coeffs)
    assert r1.diagnostics == r2.diagnostics


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


def test_brute_force_matches_worked_example():
    t1 = tr.build_triple(F1, al.TraceState(), tr.dirac_explicit([2.0]))
    p = mt.DistanceProblem(t1, al.VectorState(mt.car_vector(F1, 3)), al.TraceState())
    assert mt.brute_force_distance(p) == pytest.approx(0.5, abs=1e-6)


def test_brute_force_agrees_with_solver(uhf1):
    p = mt.DistanceProblem(uhf1, al.VectorState(mt.car_vector(F1, 1)), al.TraceState())
    bf = mt.brute_force_distance(p)
    solver = mt.distance(p, FAST).lower_bound
    assert bf == pytest.approx(solver, abs=1e-4)


def test_brute_force_zero_for_equal_states(uhf1):
    p = mt.DistanceProblem(uhf1, al.TraceState(), al.TraceState(), search_level=1)
    assert mt.brute_force_distance(p) == 0.0


def test_brute_force_dimension_guard(uhf3):
    p = mt.DistanceProblem(uhf3, al.TraceState(), al.VectorState(mt.car_vector(F3, 3)), search_level=2)
    with pytest.raises(UnsupportedError):
        mt.brute_force_distance(p)


# ---------------------------------------------------------------------------
# certified upper bound
# ---------------------------------------------------------------------------


def test_car_bound_values(uhf4):
    val, _ = mt.car_certified_upper_bound(uhf4, 0, 3)
    assert val == 1.0
    val, _ = mt.car_certified_upper_bound(uhf4, 2, 1)
    assert val == 0.25


def test_car_bound_inequality_chain(uhf3):
    _, report = mt.car_certified_upper_bound(uhf3, 1, 2, validate_samples=200, seed=3)
    assert report["chain_holds"]
    assert report["worst_link_violation"] <= 1e-9


def test_car_bound_rejects_ties():
    t = tr.build_triple(F3, al.TraceState(), tr.dirac_explicit([1.0, 1.0, 2.0]))
    with pytest.raises(PreconditionError):
        mt.car_certified_upper_bound(t, 1, 3)


def test_golden_sandwich(uhf3):
    """Solver lower bound and certified upper bound pin the value."""
    rec = mt.car_golden_case([1.0, 2.0, 4.0], 1, 3)
    assert rec["lower_bound"] >= 1.0 / 2.0 - 1e-6
    assert rec["upper_bound"] == 1.0 / 2.0
    assert rec["lower_bound"] <= rec["upper_bound"] + 1e-9


# ---------------------------------------------------------------------------
# rigidity implies distance preservation
# ---------------------------------------------------------------------------


def test_rigid_pullbacks_preserve_distances(cantor3, rng):
    t2 = tr.build_triple(al.uhf(2, 2), al.TraceState(), tr.dirac_explicit([1.0, 2.0]))
    count = 0
    worst = 0.0
    while count < 20:
        if count % 2 == 0:
            w1 = tuple(rng.integers(0, 2, size=3))
            w2 = tuple(rng.integers(0, 2, size=3))
            if w1 == w2:
                continue
            s1, s2 = al.CharacterState(w1), al.CharacterState(w2)
            spec = iso.random_portrait(3, rng)
            triple = cantor3
        else:
            v = _normalized_vector(al.uhf(2, 2), 1, rng)
            s1, s2 = al.VectorState(v), al.TraceState()
            spec = iso.random_local_automorphism(al.uhf(2, 2), rng)
            triple = t2
        assert iso.iso_check(triple, spec).in_iso
        d0 = mt.distance(mt.reduce_search_level(mt.DistanceProblem(triple, s1, s2)), FAST)
        d1 = mt.distance(
            mt.reduce_search_level(
                mt.DistanceProblem(
                    triple,
                    iso.PulledBackState(s1, spec),
                    iso.PulledBackState(s2, spec),
                )
            ),
            FAST,
        )
        worst = max(worst, abs(d0.lower_bound - d1.lower_bound))
        count += 1
    assert worst <= 2e-6


def test_triangle_defect_advisory(cantor3):
    defect = mt.triangle_defect(
        cantor3,
        al.CharacterState((0, 0, 0)),
        al.CharacterState((0, 1, 0)),
        al.CharacterState((1, 1, 0)),
        FAST,
    )
    assert defect <= 1e-4
