"""State-space distances by spectral-norm-constrained maximization.

The distance between two states is

    d(s1, s2) = sup { |s1(a) - s2(a)| : ||[D, pi(a)]|| <= 1 },

a support-function evaluation of a convex body.  Restricting to traceless
self-adjoint elements of one truncation level loses nothing: states are
unital, Hermitian parts do not increase the commutator norm, and the
reference-state conditional expectation contracts it, so the search space is
the real span of the grade >= 1 canonical basis at the smallest level both
states factor through.

The solver maximizes the scale-invariant ratio (c . t) / ||sum_i t_i B_i||
by multistart first-order ascent, where B_i are the basis commutators and c
the state-difference vector.  Every reported lower bound is certified by an
explicit feasible witness, re-evaluated through the public operations.  Exact
upper bounds are available for the matched vector-state cases, where the
grade block structure pins the optimum at 1/lambda_{n+1}.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import algebra as al
from . import triple as tr
from .errors import (
    InvalidInputError,
    PreconditionError,
    UnboundedObjectiveError,
    UnsupportedError,
)
from .linalg import operator_norm

# ---------------------------------------------------------------------------
# problem and configuration records
# ---------------------------------------------------------------------------


@dataclass
class SolverConfig:
    starts: int = 24
    max_iter: int = 500
    tol: float = 1e-8
    seed: int = 0
    step_init: float = 1.0
    step_min: float = 1e-13
    param_cap: int = 20000


@dataclass
class DistanceProblem:
    triple: tr.TruncatedTriple
    s1: al.State
    s2: al.State
    search_level: int | None = None
    informed_starts: list = field(default_factory=list)
    reduced: bool = False

    def __post_init__(self):
        if self.search_level is None:
            self.search_level = self.triple.depth
        self.triple.filtration._check_level(self.search_level)


@dataclass
class DistanceResult:
    lower_bound: float
    upper_bound: float | None
    witness: al.AlgebraElement
    diagnostics: dict

    def to_dict(self):
        return {
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "witness": self.witness.to_dict(),
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# search-space assembly
# ---------------------------------------------------------------------------


def _search_space(problem: DistanceProblem):
    """Objective vector c and commutator stack B over the traceless level basis."""
    t3 = problem.triple
    sl = problem.search_level
    filt = t3.filtration
    idxs = al.canonical_basis(filt, sl)
    dim_sl = len(idxs)
    mask = t3.gns.grades <= sl

    c = np.empty(dim_sl - 1)
    blocks = []
    for pos in range(1, dim_sl):
        coeffs = np.zeros(dim_sl, dtype=complex)
        coeffs[pos] = 1.0
        e = al.AlgebraElement(filt, sl, coeffs)
        diff = complex(problem.s1.value(e) - problem.s2.value(e))
        if abs(diff.imag) > 1e-9:
            raise InvalidInputError("state difference not real on the self-adjoint basis")
        c[pos - 1] = diff.real
        # locality: grade <= sl elements commute with all higher-grade blocks
        blocks.append(t3.commutator(e)[np.ix_(mask, mask)])
    return c, np.stack(blocks), idxs


class _ConstraintMap:
    """Evaluates t -> ||sum_i t_i B_i|| and its top-space subgradient."""

    def __init__(self, B: np.ndarray):
        self.B = B
        p, d, _ = B.shape
        self.shape = (d, d)
        self.flat = np.ascontiguousarray(B.reshape(p, d * d).T)

    def matrix(self, t: np.ndarray) -> np.ndarray:
        return (self.flat @ t).reshape(self.shape)

    def norm(self, t: np.ndarray) -> float:
        return float(np.linalg.svd(self.matrix(t), compute_uv=False)[0])

    def norm_and_subgrad(self, t: np.ndarray):
        u, s, vh = np.linalg.svd(self.matrix(t))
        g = float(s[0])
        if g < 1e-14:
            return g, np.zeros(self.B.shape[0])
        top = np.nonzero(s >= g - max(1e-9 * g, 1e-15))[0][:4]
        p, d, _ = self.B.shape
        bv = (self.B.reshape(p * d, d) @ np.conj(vh[top, :]).T).reshape(p, d, len(top))
        sub = np.real(np.einsum("pdj,dj->p", bv, np.conj(u[:, top])))
        return g, sub / len(top)


def _ascend(c: np.ndarray, cons: _ConstraintMap, t0: np.ndarray, cfg: SolverConfig):
    """Maximize (c . t)/||M(t)|| from one start; returns (value, t, iterations)."""
    t = np.asarray(t0, dtype=float)
    nrm = np.linalg.norm(t)
    if nrm < 1e-14:
        return -np.inf, t, 0
    t = t / nrm
    g, sub = cons.norm_and_subgrad(t)
    if g < 1e-14:
        if abs(c @ t) > 1e-10:
            raise UnboundedObjectiveError("nonzero objective along a Dirac-commuting direction")
        return 0.0, t, 0
    r = float(c @ t) / g
    if r < 0:
        t = -t
        g, sub = cons.norm_and_subgrad(t)
        r = -r
    step = cfg.step_init
    flat = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        grad = (c - r * sub) / g
        if np.linalg.norm(grad) < 1e-13 * max(1.0, abs(r)):
            break
        accepted = False
        while step >= cfg.step_min:
            tn = t + step * grad
            tn /= np.linalg.norm(tn)
            gn = cons.norm(tn)
            if gn < 1e-14:
                if abs(c @ tn) > 1e-10:
                    raise UnboundedObjectiveError(
                        "nonzero objective along a Dirac-commuting direction"
                    )
                step *= 0.5
                continue
            rn = float(c @ tn) / gn
            if rn > r + 1e-15 * max(1.0, abs(r)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gain = rn - r
        t, r = tn, rn
        g, sub = cons.norm_and_subgrad(t)
        r = float(c @ t) / g
        step = min(step * 2.0, 1e3)
        if gain < cfg.tol * max(1.0, abs(r)):
            flat += 1
            if flat >= 3:
                break
        else:
            flat = 0
    return r, t, it


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def reduce_search_level(problem: DistanceProblem) -> DistanceProblem:
    """Shrink the search level to the smallest one both states factor through.

    Valid whenever the triple's reference state is the trace or uniform
    measure, since the coefficient truncation onto a level is then the
    reference conditional expectation, which fixes both states' values and
    contracts the commutator norm.  Problems whose states do not visibly
    factor come back unchanged with ``reduced`` False.
    """
    ref = problem.triple.gns.state
    if not isinstance(ref, (al.TraceState, al.UniformState)):
        return replace(problem, reduced=False)
    filt = problem.triple.filtration
    m = max(
        al.vanishing_level(problem.s1, filt),
        al.vanishing_level(problem.s2, filt),
    )
    new_level = min(problem.search_level, m)
    return replace(problem, search_level=new_level, reduced=new_level < problem.search_level or new_level == 0)


def _zero_result(problem, diagnostics):
    filt = problem.triple.filtration
    zero = al.AlgebraElement(filt, problem.search_level, np.zeros(filt.dim(problem.search_level)))
    return DistanceResult(0.0, 0.0, zero, diagnostics)


def distance(problem: DistanceProblem, cfg: SolverConfig | None = None) -> DistanceResult:
    """Certified lower bound (and witness) for the state distance.

    The returned ``lower_bound`` is |s1(w) - s2(w)| for the explicit witness
    ``w``, rescaled to unit commutator norm through the public operations, so
    it holds independently of solver quality.  ``upper_bound`` is populated
    only when a matching certificate exists (identical states).
    """
    cfg = cfg or SolverConfig()
    if problem.search_level == 0:
        return _zero_result(problem, {"reason": "states factor through the scalars"})

    c, B, _ = _search_space(problem)
    p = len(c)
    if p > cfg.param_cap:
        raise UnsupportedError(f"parameter count {p} exceeds cap {cfg.param_cap}")
    if np.linalg.norm(c) < 1e-14:
        return _zero_result(problem, {"reason": "states agree on the search level"})
    cons = _ConstraintMap(B)

    starts = [("objective", c.copy())]
    for k, w in enumerate(problem.informed_starts):
        w = np.asarray(w, dtype=float)
        if w.shape != (p,):
            raise InvalidInputError("informed start has wrong parameter dimension")
        starts.append((f"informed-{k}", w))
    n_random = max(cfg.starts - len(starts), 1)
    for k in range(n_random):
        rng = np.random.default_rng([cfg.seed, k])
        starts.append((f"random-{k}", rng.normal(size=p)))

    best_val, best_t = -np.inf, None
    per_start = []
    for kind, t0 in starts:
        val, t, iters = _ascend(c, cons, t0, cfg)
        per_start.append({"start": kind, "objective": float(val), "iterations": iters})
        if val > best_val:
            best_val, best_t = val, t

    # polish the incumbent with a finer stopping rule
    polish_cfg = replace(cfg, tol=cfg.tol * 1e-4, step_init=1e-2)
    val, t, iters = _ascend(c, cons, best_t, polish_cfg)
    per_start.append({"start": "polish", "objective": float(val), "iterations": iters})
    if val > best_val:
        best_val, best_t = val, t

    # certify through the public operations
    filt = problem.triple.filtration
    coeffs = np.zeros(filt.dim(problem.search_level), dtype=complex)
    coeffs[1:] = best_t
    raw = al.AlgebraElement(filt, problem.search_level, coeffs)
    nrm = problem.triple.commutator_norm(raw)
    witness = raw * (1.0 / nrm)
    lower = abs(complex(problem.s1.value(witness) - problem.s2.value(witness)))
    diagnostics = {
        "search_level": problem.search_level,
        "parameters": p,
        "starts": len(starts),
        "per_start": per_start,
        "solver_objective": float(best_val),
        "certificate": "lower-bound only",
    }
    return DistanceResult(float(lower), None, witness, diagnostics)


def _brute_force_core(c: np.ndarray, B: np.ndarray, points: int = 10000, seed: int = 12345) -> float:
    """Dense direction scan plus shrinking local refinement over <= 4 parameters."""
    c = np.asarray(c, dtype=float)
    p = len(c)
    if p > 4:
        raise UnsupportedError(f"brute force supports <= 4 parameters, got {p}")
    if np.linalg.norm(c) < 1e-14:
        return 0.0

    if p == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif p == 2:
        ang = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        rng = np.random.default_rng(seed)
        n = points if p == 3 else 20 * points
        dirs = rng.normal(size=(n, p))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def batch_value(ts):
        m = np.tensordot(ts, B, axes=1)
        s = np.linalg.svd(m, compute_uv=False)[:, 0]
        num = ts @ c
        bad = s < 1e-14
        if np.any(bad & (np.abs(num) > 1e-10)):
            raise UnboundedObjectiveError("nonzero objective along a Dirac-commuting direction")
        return np.where(bad, 0.0, np.abs(num) / np.where(bad, 1.0, s))

    vals = batch_value(dirs)
    best = int(np.argmax(vals))
    best_val, best_t = float(vals[best]), dirs[best]

    rng = np.random.default_rng(seed + 1)
    sigma = 0.3
    for _ in range(30):
        cand = best_t[None, :] + sigma * rng.normal(size=(300, p))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        cv = batch_value(cand)
        j = int(np.argmax(cv))
        if cv[j] > best_val:
            best_val, best_t = float(cv[j]), cand[j]
        sigma *= 0.7
    return best_val


def brute_force_distance(problem: DistanceProblem, points: int = 10000, seed: int = 12345) -> float:
    """Independent oracle: dense direction scan plus shrinking local refinement.

    Only available for parameter dimension <= 4 after reduction.
    """
    if problem.search_level == 0:
        return 0.0
    c, B, _ = _search_space(problem)
    return _brute_force_core(c, B, points=points, seed=seed)


def triangle_defect(triple, s1, s2, s3, cfg: SolverConfig | None = None) -> float:
    """Advisory check d(s1,s3) - d(s1,s2) - d(s2,s3); soft because all three
    values are lower bounds, so small positive defects can be solver artifacts."""
    def solve(a, b):
        return distance(reduce_search_level(DistanceProblem(triple, a, b)), cfg).lower_bound

    return solve(s1, s3) - solve(s1, s2) - solve(s2, s3)


_CAR_VECTORS = {
    1: np.array([[1.0, 0.0], [1.0, 0.0]]),
    2: np.array([[1.0, 0.0], [1.0j, 0.0]]),
    3: np.array([[0.0, np.sqrt(2.0)], [0.0, 0.0]]),
}


def car_vector(filtration: al.Filtration, l: int) -> al.AlgebraElement:
    """A canonical level-1 vector whose state has unit Bloch component l."""
    if l not in (1, 2, 3):
        raise InvalidInputError("label must be 1, 2 or 3")
    return al.from_matrix(filtration, 1, _CAR_VECTORS[l])


def car_certified_upper_bound(
    triple: tr.TruncatedTriple, n: int, l: int, validate_samples: int = 0, seed: int = 0
):
    """Exact upper bound 1/lambda_{n+1} for d(phi_{1^n (x) v}, trace), v of type l.

    With ``validate_samples`` > 0 the inequality chain behind the bound is
    checked on random feasible elements x of level n+1, with
    x~ = x - E_n(x):

        |coeff of x~ at (identity^n, l)|  <=  ||P_0 pi(x~) Q_{n+1}||
                                          <=  ||[D, x~]|| / lambda_{n+1}
        and  ||[D, x~]||  <=  ||[D, x]||.
    """
    filt = triple.filtration
    if filt.family != "uhf" or filt.k != 2:
        raise PreconditionError("certified bound requires the uhf k=2 family")
    if not triple.dirac.pairwise_distinct:
        raise PreconditionError("certified bound requires pairwise distinct eigenvalues")
    if triple.depth < n + 1:
        raise PreconditionError(f"needs depth >= {n + 1}")
    if l not in (1, 2, 3):
        raise InvalidInputError("label must be 1, 2 or 3")
    lam = triple.lambdas
    value = 1.0 / float(lam[n + 1])

    report = {"value": value, "samples": validate_samples, "chain_holds": True}
    if validate_samples:
        rng = np.random.default_rng(seed)
        idxs = al.canonical_basis(filt, n + 1)
        target_word = (4,) * n + (l,)
        target_pos = next(i for i, ix in enumerate(idxs) if ix.word == target_word)
        mask0 = triple.gns.grades == 0
        maskn1 = triple.gns.grades == n + 1
        worst = 0.0
        for _ in range(validate_samples):
            coeffs = rng.normal(size=len(idxs))
            x = al.AlgebraElement(filt, n + 1, coeffs.astype(complex))
            nx = triple.commutator_norm(x)
            if nx < 1e-12:
                continue
            x = x * (1.0 / nx)
            xt = x - al.conditional_expectation(x, n).embed(n + 1)
            alpha = abs(x.coeffs[target_pos])
            comp = operator_norm(triple.represent(xt)[np.ix_(mask0, maskn1)])
            cn_t = triple.commutator_norm(xt)
            links = [
                alpha - comp,
                comp - cn_t / lam[n + 1],
                cn_t - triple.commutator_norm(x),
            ]
            worst = max(worst, *links)
            if any(v > 1e-9 for v in links):
                report["chain_holds"] = False
        report["worst_link_violation"] = worst
    return value, report


def car_golden_case(lambdas, n: int, l: int, cfg: SolverConfig | None = None) -> dict:
    """Distance between the trace and a shifted matched vector state.

    Builds the smallest truncation that contains the search level, runs the
    certified solver with the attaining element as an informed start, and
    pins the value with the exact upper bound.
    """
    lambdas = list(map(float, lambdas))
    if len(lambdas) < n + 1:
        raise InvalidInputError(f"need at least {n + 1} eigenvalues")
    depth = n + 1
    filt = al.uhf(2, depth)
    triple = tr.build_triple(filt, al.TraceState(), tr.dirac_explicit(lambdas[:depth]))
    v = al.shift_embed(car_vector(filt, l), n)
    phi = al.VectorState(v)

    problem = reduce_search_level(DistanceProblem(triple, phi, al.TraceState()))
    idxs = al.canonical_basis(filt, problem.search_level)
    informed = np.zeros(len(idxs) - 1)
    target_word = (4,) * n + (l,)
    for i, ix in enumerate(idxs[1:]):
        if ix.word == target_word:
            informed[i] = 1.0
    problem.informed_starts.append(informed)

    result = distance(problem, cfg)
    upper, _ = car_certified_upper_bound(triple, n, l)
    if result.lower_bound > upper + 1e-9:
        raise RuntimeError("solver lower bound exceeds the certified upper bound")
    return {
        "n": n,
        "l": l,
        "lambda": lambdas[:depth],
        "lower_bound": result.lower_bound,
        "upper_bound": upper,
        "search_level": problem.search_level,
        "diagnostics": result.diagnostics,
    }
