"""Automorphism classification against the graded Dirac triple.

An automorphism is *unitarily rigid* for a triple when it is implemented on
the representation space by a unitary commuting with the Dirac operator.
For pairwise distinct eigenvalues this holds exactly when the automorphism
preserves every filtration level and the reference state; with tied
eigenvalues only the merged level blocks need to be preserved.  This module
decides membership, enumerates the full tree-automorphism group of the
binary Cantor triple, and runs the quantitative experiments that separate
unitary rigidity from plain distance preservation: tensor-slot switches
shift the distance-to-trace of matched vector states, the two-point flip
preserves all distances without commuting with the Dirac operator, and the
one-sided shift stretches commutator norms by an explicit eigenvalue ratio.
"""

from dataclasses import dataclass
from itertools import combinations, permutations, product

import numpy as np

from . import algebra as al
from . import metric as mt
from . import triple as tr
from .errors import (
    AmbiguousVerdictError,
    InvalidInputError,
    NoUnitaryError,
    PreconditionError,
    UnsupportedError,
)
from .linalg import TOL, operator_norm, random_unitary

# ---------------------------------------------------------------------------
# automorphism specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotAutomorphism:
    """Tensor-slot permutation, followed by local and block unitaries.

    ``perm[i-1]`` is the destination slot of factor i.  ``locals_`` holds one
    k x k unitary per slot (or None), ``blocks`` a list of (start_slot, U)
    pairs with U unitary on the contiguous group starting there.  Acts as
    conjugation by (block product) (tensor of locals) (permutation operator).
    """

    perm: tuple
    locals_: tuple = None
    blocks: tuple = ()

    def __post_init__(self):
        if sorted(self.perm) != list(range(1, len(self.perm) + 1)):
            raise InvalidInputError("perm must be a permutation of 1..N")


def identity_slot_automorphism(n_slots: int) -> SlotAutomorphism:
    return SlotAutomorphism(tuple(range(1, n_slots + 1)))


def switch(i: int, j: int, n_slots: int) -> SlotAutomorphism:
    """Transposition of tensor factors i and j."""
    p = list(range(1, n_slots + 1))
    p[i - 1], p[j - 1] = p[j - 1], p[i - 1]
    return SlotAutomorphism(tuple(p))


@dataclass(frozen=True)
class TreePortrait:
    """Swap bit per internal node of the depth-N binary tree, BFS order."""

    depth: int
    bits: tuple

    def __post_init__(self):
        if len(self.bits) != 2**self.depth - 1:
            raise InvalidInputError(f"portrait needs {2 ** self.depth - 1} bits")
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidInputError("portrait bits must be 0/1")

    def bit(self, node) -> int:
        return self.bits[2 ** len(node) - 1 + al.leaf_index(node)]

    def map_word(self, word):
        out = []
        node = ()
        for w in word:
            out.append(w ^ self.bit(node))
            node = node + (w,)
        return tuple(out)


def identity_portrait(depth: int) -> TreePortrait:
    return TreePortrait(depth, (0,) * (2**depth - 1))


def odometer_portrait(depth: int) -> TreePortrait:
    """Add-one-with-carry from the first coordinate, as a tree portrait."""
    bits = [0] * (2**depth - 1)
    for g in range(depth):
        node = (1,) * g
        bits[2**g - 1 + al.leaf_index(node)] = 1
    return TreePortrait(depth, tuple(bits))


@dataclass(frozen=True)
class LeafPermutation:
    """Arbitrary permutation of the depth-N leaves (adversarial inputs)."""

    depth: int
    perm: tuple

    def __post_init__(self):
        if sorted(self.perm) != list(range(2**self.depth)):
            raise InvalidInputError("not a permutation of the leaves")


@dataclass(frozen=True)
class ComposedAutomorphism:
    """Apply ``inner`` first, then ``outer``."""

    outer: object
    inner: object


@dataclass(frozen=True)
class FlipM2:
    """Marker for the two-point flip demo; not a filtration automorphism spec."""

    d1: float = 0.0
    d2: float = 1.0


# -- concrete actions --------------------------------------------------------


def slot_permutation_operator(k: int, perm) -> np.ndarray:
    """Unitary W moving tensor factor i to slot perm[i] on (C^k)^N."""
    n = len(perm)
    size = k**n
    w = np.zeros((size, size))
    for src in product(range(k), repeat=n):
        dst = [0] * n
        for i in range(n):
            dst[perm[i] - 1] = src[i]
        r = 0
        for d in dst:
            r = k * r + d
        s = 0
        for d in src:
            s = k * s + d
        w[r, s] = 1.0
    return w


def global_unitary(spec: SlotAutomorphism, filtration: al.Filtration) -> np.ndarray:
    """The conjugating unitary of a slot automorphism at full depth."""
    k, n = filtration.k, filtration.depth
    if len(spec.perm) != n:
        raise InvalidInputError("perm length does not match the depth")
    v = slot_permutation_operator(k, spec.perm)
    if spec.locals_ is not None:
        loc = np.eye(1, dtype=complex)
        for u in spec.locals_:
            loc = np.kron(loc, np.asarray(u, dtype=complex))
        v = loc @ v
    for start, u in spec.blocks:
        u = np.asarray(u, dtype=complex)
        width = round(np.log(u.shape[0]) / np.log(k))
        if k**width != u.shape[0] or start < 1 or start + width - 1 > n:
            raise InvalidInputError("block unitary does not fit the slot range")
        emb = np.kron(
            np.kron(np.eye(k ** (start - 1), dtype=complex), u),
            np.eye(k ** (n - start - width + 1), dtype=complex),
        )
        v = emb @ v
    return v


def leaf_permutation_array(spec, depth: int) -> np.ndarray:
    """Materialize a cantor automorphism spec as a permutation of leaf indices."""
    if isinstance(spec, LeafPermutation):
        if spec.depth != depth:
            raise InvalidInputError("leaf permutation depth mismatch")
        return np.asarray(spec.perm)
    if isinstance(spec, TreePortrait):
        if spec.depth != depth:
            raise InvalidInputError("portrait depth mismatch")
        out = np.empty(2**depth, dtype=int)
        for word in product((0, 1), repeat=depth):
            out[al.leaf_index(word)] = al.leaf_index(spec.map_word(word))
        return out
    if isinstance(spec, ComposedAutomorphism):
        a = leaf_permutation_array(spec.outer, depth)
        b = leaf_permutation_array(spec.inner, depth)
        return a[b]
    raise InvalidInputError(f"{type(spec).__name__} is not a cantor automorphism spec")


def apply_automorphism(spec, x: al.AlgebraElement) -> al.AlgebraElement:
    """Image of an element under the automorphism, at full depth."""
    filt = x.filtration
    n = filt.depth
    if isinstance(spec, ComposedAutomorphism):
        return apply_automorphism(spec.outer, apply_automorphism(spec.inner, x))
    if filt.family == "uhf":
        if not isinstance(spec, SlotAutomorphism):
            raise InvalidInputError(f"{type(spec).__name__} does not act on uhf filtrations")
        v = global_unitary(spec, filt)
        m = x.materialize(n)
        return al.from_matrix(filt, n, v @ m @ np.conj(v).T)
    g = leaf_permutation_array(spec, n)
    vals = x.materialize(n)
    out = np.empty_like(vals)
    out[g] = vals  # new function value at g(p) is the old value at p
    return al.from_values(filt, n, out)


def compose(outer, inner):
    """Structural composition (outer after inner)."""
    if isinstance(outer, TreePortrait) and isinstance(inner, TreePortrait):
        return compose_portraits(outer, inner)
    if isinstance(outer, LeafPermutation) and isinstance(
        inner, (LeafPermutation, TreePortrait)
    ):
        depth = outer.depth
        a = leaf_permutation_array(outer, depth)
        b = leaf_permutation_array(inner, depth)
        return LeafPermutation(depth, tuple(int(v) for v in a[b]))
    if isinstance(outer, SlotAutomorphism) and isinstance(inner, SlotAutomorphism):
        return ComposedAutomorphism(outer, inner)
    return ComposedAutomorphism(outer, inner)


def compose_portraits(outer: TreePortrait, inner: TreePortrait) -> TreePortrait:
    """Portrait of (outer after inner): bit(v) = inner(v) xor outer(inner node image)."""
    if outer.depth != inner.depth:
        raise InvalidInputError("portrait depth mismatch")
    depth = outer.depth
    bits = []
    for g in range(depth):
        for node in product((0, 1), repeat=g):
            bits.append(inner.bit(node) ^ outer.bit(inner.map_word(node)))
    return TreePortrait(depth, tuple(bits))


def portrait_from_leaf_permutation(perm, depth: int) -> TreePortrait:
    """Recover the portrait of a tree-automorphism permutation; raises otherwise."""
    arr = np.asarray(perm)
    bits = [0] * (2**depth - 1)
    for g in range(depth):
        for node in product((0, 1), repeat=g):
            base = al.leaf_index(node + (0,) * (depth - g))
            img = int(arr[base])
            img_word = tuple((img >> (depth - 1 - i)) & 1 for i in range(depth))
            bits[2**g - 1 + al.leaf_index(node)] = img_word[g]
    cand = TreePortrait(depth, tuple(bits))
    if not np.array_equal(leaf_permutation_array(cand, depth), arr):
        raise InvalidInputError("permutation is not a tree automorphism")
    return cand


def invert(spec):
    """Structural inverse of an automorphism spec."""
    if isinstance(spec, TreePortrait):
        inv = np.argsort(leaf_permutation_array(spec, spec.depth))
        return portrait_from_leaf_permutation(inv, spec.depth)
    if isinstance(spec, LeafPermutation):
        inv = np.argsort(np.asarray(spec.perm))
        return LeafPermutation(spec.depth, tuple(int(v) for v in inv))
    if isinstance(spec, SlotAutomorphism):
        n = len(spec.perm)
        inv_perm = [0] * n
        for i, tgt in enumerate(spec.perm, start=1):
            inv_perm[tgt - 1] = i
        ident = tuple(range(1, n + 1))
        # forward action conjugates by (blocks)(locals)(perm); the inverse
        # conjugates by the adjoint, i.e. blocks first, locals, then perm
        out = None
        if spec.blocks:
            adj_blocks = tuple(
                (s, np.conj(np.asarray(u)).T) for s, u in reversed(spec.blocks)
            )
            out = SlotAutomorphism(ident, None, adj_blocks)
        if spec.locals_ is not None:
            adj_locals = SlotAutomorphism(
                ident, tuple(np.conj(np.asarray(u)).T for u in spec.locals_)
            )
            out = adj_locals if out is None else ComposedAutomorphism(adj_locals, out)
        perm_part = SlotAutomorphism(tuple(inv_perm))
        return perm_part if out is None else ComposedAutomorphism(perm_part, out)
    raise InvalidInputError(f"cannot invert {type(spec).__name__}")


# ---------------------------------------------------------------------------
# verification and verdicts
# ---------------------------------------------------------------------------


def automorphism_residual(spec, filtration: al.Filtration, samples: int = 40, seed: int = 0):
    """Largest defect of multiplicativity and *-preservation on basis pairs."""
    n = filtration.depth
    idxs = al.canonical_basis(filtration, n)
    dim = len(idxs)
    images = {}

    def img(j):
        if j not in images:
            coeffs = np.zeros(dim, dtype=complex)
            coeffs[j] = 1.0
            images[j] = apply_automorphism(spec, al.AlgebraElement(filtration, n, coeffs))
        return images[j]

    def unit(j):
        coeffs = np.zeros(dim, dtype=complex)
        coeffs[j] = 1.0
        return al.AlgebraElement(filtration, n, coeffs)

    if dim * dim <= 400:
        pairs = [(i, j) for i in range(dim) for j in range(dim)]
    else:
        rng = np.random.default_rng(seed)
        pairs = [tuple(rng.integers(0, dim, size=2)) for _ in range(samples)]
    worst = 0.0
    for i, j in pairs:
        lhs = apply_automorphism(spec, unit(i) * unit(j))
        worst = max(worst, float(np.max(np.abs((lhs - img(i) * img(j)).coeffs))))
    for i in set(i for p in pairs for i in p):
        # the basis is self-adjoint, so images must be too
        worst = max(worst, float(np.max(np.abs((img(i).adjoint() - img(i)).coeffs))))
    return worst


def coefficient_images(spec, filtration: al.Filtration) -> np.ndarray:
    """Matrix A with column j the canonical coefficients of the image of e_j."""
    n = filtration.depth
    dim = filtration.dim(n)
    a = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        coeffs = np.zeros(dim, dtype=complex)
        coeffs[j] = 1.0
        a[:, j] = apply_automorphism(spec, al.AlgebraElement(filtration, n, coeffs)).coeffs
    return a


def filtration_check(spec, filtration: al.Filtration, levels=None):
    """Per-level truth of "the automorphism maps the level into itself"."""
    n = filtration.depth
    levels = list(range(1, n + 1)) if levels is None else list(levels)
    a = coefficient_images(spec, filtration)
    grades = np.array([ix.grade for ix in al.canonical_basis(filtration, n)])
    out = []
    for lev in levels:
        cols = grades <= lev
        rows = grades > lev
        leak = np.max(np.abs(a[np.ix_(rows, cols)]), initial=0.0)
        out.append(bool(leak <= TOL.structural))
    return out


def implementing_unitary(triple: tr.TruncatedTriple, spec) -> np.ndarray:
    """Unitary sending b xi to alpha(b) xi; exists iff the state is preserved."""
    gns = triple.gns
    state = gns.state
    u = np.empty((gns.dim, gns.dim), dtype=complex)
    for j, b in enumerate(gns.basis_elements):
        image = apply_automorphism(spec, b)
        if abs(state.value(image) - state.value(b)) > TOL.structural:
            raise NoUnitaryError("automorphism does not preserve the reference state")
        u[:, j] = triple.vector_of(image)
    if operator_norm(np.conj(u).T @ u - np.eye(gns.dim)) > TOL.structural:
        raise NoUnitaryError("induced map is not a unitary")
    return u


@dataclass
class IsoVerdict:
    state_preserved: bool
    filtration_levels_preserved: list
    implementing_unitary: np.ndarray | None
    commutator_residual: float | None
    in_iso: bool

    def to_dict(self):
        return {
            "state_preserved": self.state_preserved,
            "filtration_levels_preserved": self.filtration_levels_preserved,
            "has_unitary": self.implementing_unitary is not None,
            "commutator_residual": self.commutator_residual,
            "in_iso": self.in_iso,
        }


def iso_check(triple: tr.TruncatedTriple, spec, verify: bool = True) -> IsoVerdict:
    """Decide unitary rigidity of an automorphism for the triple."""
    filt = triple.filtration
    if verify:
        resid = automorphism_residual(spec, filt)
        if resid > TOL.structural:
            raise InvalidInputError(f"spec is not a *-automorphism (residual {resid:.2e})")
    levels = filtration_check(spec, filt)
    try:
        u = implementing_unitary(triple, spec)
    except NoUnitaryError:
        return IsoVerdict(False, levels, None, None, False)
    resid = operator_norm(triple.D @ u - u @ triple.D)
    if TOL.iso_residual < resid < TOL.iso_ambiguous:
        raise AmbiguousVerdictError(
            f"commutation residual {resid:.3e} falls in the guard band"
        )
    return IsoVerdict(True, levels, u, float(resid), resid <= TOL.iso_residual)


def required_levels(dirac: tr.DiracSpec):
    """Levels whose preservation unitary rigidity demands: ends of equal-eigenvalue runs."""
    lam = dirac.lambdas
    out = []
    for n in range(1, len(lam)):
        if n == len(lam) - 1 or lam[n + 1] != lam[n]:
            out.append(n)
    return out


def iso_prediction(triple: tr.TruncatedTriple, verdict: IsoVerdict) -> bool:
    """Membership predicted from state and block-level preservation alone."""
    req = required_levels(triple.dirac)
    return verdict.state_preserved and all(
        verdict.filtration_levels_preserved[n - 1] for n in req
    )


# ---------------------------------------------------------------------------
# group enumeration on the Cantor triple
# ---------------------------------------------------------------------------


def _leaf_basis_dirac(triple: tr.TruncatedTriple) -> np.ndarray:
    """Dirac matrix rotated to the normalized leaf-indicator basis."""
    n = triple.depth
    h = al._haar_stack(n)  # rows = basis, cols = leaves
    v = h.T / np.sqrt(2**n)  # unitary: coefficients -> scaled leaf values
    return v @ np.diag(triple.d_diag) @ v.T


def enumerate_cantor_iso(
    triple: tr.TruncatedTriple, mode: str = "portraits", progress: bool = False
) -> dict:
    """Count and verify the rigid automorphisms of the Cantor triple.

    ``portraits`` checks every tree portrait (exhaustively up to depth 4);
    ``exhaustive`` scans all leaf permutations (depth <= 3) and reports how
    many commute with the Dirac operator, which must be exactly the portraits.
    """
    filt = triple.filtration
    if filt.family != "cantor":
        raise InvalidInputError("enumeration applies to cantor triples")
    n = filt.depth
    order = 2 ** (2**n - 1)
    d_leaf = _leaf_basis_dirac(triple)
    report = {"depth": n, "mode": mode, "group_order": order}

    if mode == "portraits":
        if n > 8:
            raise UnsupportedError("portrait enumeration capped at depth 8")
        exhaustive = order <= 65536
        if exhaustive:
            candidates = list(product((0, 1), repeat=2**n - 1))
        else:
            rng = np.random.default_rng(0)
            candidates = {tuple(rng.integers(0, 2, size=2**n - 1)) for _ in range(512)}
            candidates = sorted(candidates)
        passing = 0
        for bits in candidates:
            g = leaf_permutation_array(TreePortrait(n, tuple(bits)), n)
            resid = float(np.max(np.abs(d_leaf[np.ix_(g, g)] - d_leaf)))
            if resid <= TOL.iso_residual:
                passing += 1
        report.update(
            scanned=len(candidates),
            passing=passing,
            exhaustive=exhaustive,
            all_pass=passing == len(candidates),
        )
        return report

    if mode == "exhaustive":
        if n > 3:
            raise UnsupportedError("exhaustive leaf scan capped at depth 3")
        leaves = 2**n
        passing = []
        scanned = 0
        for perm in permutations(range(leaves)):
            scanned += 1
            g = np.asarray(perm)
            resid = float(np.max(np.abs(d_leaf[np.ix_(g, g)] - d_leaf)))
            if resid <= TOL.iso_residual:
                passing.append(perm)
            if progress and scanned % 5040 == 0:
                print(f"scanned {scanned} permutations, {len(passing)} passing")
        portraits = {
            tuple(int(v) for v in leaf_permutation_array(TreePortrait(n, bits), n))
            for bits in product((0, 1), repeat=2**n - 1)
        }
        report.update(
            scanned=scanned,
            passing=len(passing),
            matches_portraits=set(passing) == portraits,
            elements=sorted(passing),
        )
        return report

    raise InvalidInputError(f"unknown mode {mode!r}")


def composition_law_check(depth: int, samples: int = 25, seed: int = 0) -> bool:
    """Portrait composition formula against straight permutation composition."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        pa = TreePortrait(depth, tuple(rng.integers(0, 2, size=2**depth - 1)))
        pb = TreePortrait(depth, tuple(rng.integers(0, 2, size=2**depth - 1)))
        via_formula = leaf_permutation_array(compose_portraits(pa, pb), depth)
        direct = leaf_permutation_array(pa, depth)[leaf_permutation_array(pb, depth)]
        if not np.array_equal(via_formula, direct):
            return False
    return True


def semidirect_structure_check(depth: int, samples: int = 25, seed: int = 0) -> bool:
    """Deepest-level swaps form a normal subgroup complemented by shallower portraits."""
    rng = np.random.default_rng(seed)
    n_deep = 2 ** (depth - 1)
    n_shallow = 2 ** (depth - 1) - 1
    for _ in range(samples):
        deep = TreePortrait(
            depth, (0,) * n_shallow + tuple(rng.integers(0, 2, size=n_deep))
        )
        any_p = TreePortrait(depth, tuple(rng.integers(0, 2, size=2**depth - 1)))
        conj = compose_portraits(compose_portraits(any_p, deep), invert(any_p))
        if any(b != 0 for b in conj.bits[:n_shallow]):
            return False
        # the quotient projection (forget deepest bits) must be a homomorphism
        prod = compose_portraits(any_p, deep)
        if prod.bits[:n_shallow] != any_p.bits[:n_shallow]:
            return False
    return True


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _detect_bloch_label(v: al.AlgebraElement) -> int:
    """The Pauli label l with phi_v(sigma_l) = 1; error when v is not of that shape."""
    filt = v.filtration
    phi = al.VectorState(v if v.level >= 1 else v.embed(1))
    vals = [complex(phi.value(al.basis_element(filt, 1, (j,)))) for j in (1, 2, 3)]
    labels = [j for j, z in zip((1, 2, 3), vals) if abs(z - 1.0) <= 1e-9]
    if len(labels) != 1 or any(
        abs(z) > 1e-9 for j, z in zip((1, 2, 3), vals) if j != labels[0]
    ):
        raise PreconditionError(
            "vector state must have a unit Bloch component on exactly one label"
        )
    return labels[0]


def switch_iso_violation(
    triple: tr.TruncatedTriple,
    k: int,
    v: al.AlgebraElement | None = None,
    cfg: mt.SolverConfig | None = None,
) -> dict:
    """Certified distance gap showing the slot switch 1 <-> k+1 moves a state.

    d(trace, omega_v) = 1/lambda_1 while d(trace, omega_v o switch) =
    d(trace, omega_{shifted v}) = 1/lambda_{k+1}; a nonzero gap certifies the
    switch changes some distance.
    """
    filt = triple.filtration
    if filt.family != "uhf" or filt.k != 2:
        raise PreconditionError("switch experiment runs on the uhf k=2 family")
    if not triple.dirac.pairwise_distinct:
        raise PreconditionError("switch experiment requires pairwise distinct eigenvalues")
    if k < 0 or triple.depth < k + 1:
        raise PreconditionError(f"need depth >= {k + 1}")
    if v is None:
        v = mt.car_vector(filt, 3)
    l = _detect_bloch_label(v)
    lam = triple.lambdas
    before = mt.car_golden_case([float(x) for x in lam[1:]], 0, l, cfg)
    after = mt.car_golden_case([float(x) for x in lam[1:]], k, l, cfg)
    gap = abs(1.0 / lam[1] - 1.0 / lam[k + 1])
    certified = (
        before["lower_bound"] >= before["upper_bound"] - 1e-6
        and after["lower_bound"] >= after["upper_bound"] - 1e-6
    )
    return {
        "k": k,
        "label": l,
        "d_before": before,
        "d_after": after,
        "gap": float(gap),
        "violation_certified": bool(certified and gap > 1e-12),
    }


def flip_demo(
    d1: float = 0.0,
    d2: float = 1.0,
    n_pairs: int = 100,
    n_elements: int = 100,
    seed: int = 0,
) -> dict:
    """Two-point demo: the flip preserves every distance yet moves the Dirac.

    The algebra is M_2 acting on C^2 with D = diag(d1, d2).  The flip unitary
    U swaps the two basis vectors; [D, U*aU] = -U*[D, a]U holds exactly, so
    conjugation by U preserves all state distances, while [D, U] != 0 keeps
    it outside the unitarily rigid group.  Distances are evaluated by the
    brute-force oracle on state pairs with matching diagonal parts (the only
    pairs at finite distance for this Dirac).
    """
    if d1 == d2:
        raise PreconditionError("needs two distinct Dirac eigenvalues")
    rng = np.random.default_rng(seed)
    d = np.diag([d1, d2]).astype(complex)
    flip = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    comm = d @ flip - flip @ d

    sigma = al.slot_basis(2)[:3]  # sigma_1, sigma_2, sigma_3
    b_stack = np.stack([d @ s - s @ d for s in sigma[:2]])

    identity_residual = 0.0
    for _ in range(n_elements):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lhs = d @ (np.conj(flip).T @ a @ flip) - (np.conj(flip).T @ a @ flip) @ d
        rhs = -np.conj(flip).T @ (d @ a - a @ d) @ flip
        identity_residual = max(identity_residual, float(np.max(np.abs(lhs - rhs))))

    max_dev = 0.0
    max_identity_auto_dev = 0.0
    max_oracle_gap = 0.0
    for _ in range(n_pairs):
        bloch = rng.normal(size=(2, 3))
        bloch /= np.maximum(np.linalg.norm(bloch, axis=1, keepdims=True), 1.0) * 1.001
        bloch[1, 2] = bloch[0, 2]  # equal diagonal parts keep the distance finite
        c = bloch[0] - bloch[1]
        c_flip = c * np.array([1.0, -1.0, -1.0])  # Bloch action of the flip
        d_plain = mt._brute_force_core(c[:2], b_stack, points=4000, seed=seed)
        d_flip = mt._brute_force_core(c_flip[:2], b_stack, points=4000, seed=seed)
        d_ident = mt._brute_force_core((c * np.ones(3))[:2], b_stack, points=4000, seed=seed)
        max_dev = max(max_dev, abs(d_plain - d_flip))
        max_identity_auto_dev = max(max_identity_auto_dev, abs(d_plain - d_ident))
        analytic = float(np.hypot(c[0], c[1]) / abs(d2 - d1))
        max_oracle_gap = max(max_oracle_gap, abs(d_plain - analytic))

    return {
        "d1": d1,
        "d2": d2,
        "commutator_operator_norm": operator_norm(comm),
        "commutator_frobenius_norm": float(np.linalg.norm(comm)),
        "flip_outside_rigid_group": operator_norm(comm) > 0.1,
        "identity_residual": identity_residual,
        "n_pairs": n_pairs,
        "max_distance_deviation": max_dev,
        "max_oracle_vs_analytic": max_oracle_gap,
        "identity_automorphism_deviation": max_identity_auto_dev,
    }


def shift_inequality_check(
    triple: tr.TruncatedTriple, x: al.AlgebraElement, n: int, c: float
) -> dict:
    """Commutator stretching under the one-sided shift.

    Whenever (c+1) lambda_n <= lambda_{n+1}, every level-1 element obeys
    ||[D, x]|| <= lambda_1 / (c lambda_n) * ||[D, shift^n(x)]||.
    """
    lam = triple.lambdas
    if c <= 0:
        raise PreconditionError("c must be positive")
    if n < 1 or triple.depth < n + 1:
        raise PreconditionError(f"need depth >= {n + 1}")
    if (c + 1.0) * lam[n] > lam[n + 1] + 1e-12:
        raise PreconditionError("(c+1) lambda_n <= lambda_{n+1} fails")
    if x.level > 1:
        raise InvalidInputError("x must live at level 1")
    lhs = triple.commutator_norm(x)
    shifted = al.shift_embed(x, n)
    rhs = (lam[1] / (c * lam[n])) * triple.commutator_norm(shifted)
    report = {
        "n": n,
        "c": c,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "holds": bool(lhs <= rhs + 1e-9),
    }
    if n == 1 and 2 * lam[1] < lam[2]:
        factor = (lam[2] - lam[1]) / lam[1]
        lhs1 = triple.commutator_norm(al.shift_embed(x, 1))
        report["special_case"] = {
            "factor": float(factor),
            "holds": bool(lhs1 >= factor * lhs - 1e-9),
        }
    return report


def m_invariance_experiment(
    gamma: float, depth: int, cfg: mt.SolverConfig | None = None, seed: int = 0
) -> dict:
    """Distance table over all leaf pairs, grouped by the first split level.

    For gamma below (3 - sqrt(5))/2 the distance between two leaf characters
    depends only on m = the first coordinate where the leaves differ: tree
    automorphisms act transitively on pairs with fixed m and preserve the
    distance, so values are constant on m-classes and separated across them.
    A non-tree leaf permutation moves at least one pair across classes.
    """
    limit = (3.0 - np.sqrt(5.0)) / 2.0
    if not (0.0 < gamma < limit):
        raise PreconditionError(f"gamma must lie in (0, {limit:.6f})")
    if depth > 4:
        raise PreconditionError("experiment capped at depth 4")
    filt = al.cantor(depth)
    triple = tr.build_triple(filt, al.UniformState(), tr.dirac_geometric(gamma, depth))
    leaves = list(product((0, 1), repeat=depth))

    def split_level(x, y):
        for i, (a, b) in enumerate(zip(x, y), start=1):
            if a != b:
                return i
        return None

    classes = {}
    for x, y in combinations(leaves, 2):
        prob = mt.reduce_search_level(
            mt.DistanceProblem(triple, al.CharacterState(x), al.CharacterState(y))
        )
        res = mt.distance(prob, cfg)
        classes.setdefault(split_level(x, y), []).append(
            {"x": list(x), "y": list(y), "distance": res.lower_bound}
        )

    stats = {}
    for m, rows in sorted(classes.items()):
        vals = np.array([r["distance"] for r in rows])
        stats[m] = {
            "count": len(rows),
            "mean": float(vals.mean()),
            "min": float(vals.min()),
            "max": float(vals.max()),
            "spread": float(vals.max() - vals.min()),
        }
    spread = max(s["spread"] for s in stats.values())
    ms = sorted(stats)
    gap = min(
        abs(stats[a]["mean"] - stats[b]["mean"]) for a, b in combinations(ms, 2)
    )

    # portraits fix every class; a cross-subtree transposition does not
    rng = np.random.default_rng(seed)
    portraits_fix = True
    for _ in range(20):
        p = TreePortrait(depth, tuple(rng.integers(0, 2, size=2**depth - 1)))
        g = leaf_permutation_array(p, depth)
        for x, y in combinations(leaves, 2):
            gx = leaves[g[al.leaf_index(x)]]
            gy = leaves[g[al.leaf_index(y)]]
            if split_level(gx, gy) != split_level(x, y):
                portraits_fix = False
    violating = list(range(2**depth))
    violating[0], violating[-1] = violating[-1], violating[0]
    vperm = np.asarray(violating)
    violator_moves = False
    for x, y in combinations(leaves, 2):
        gx = leaves[vperm[al.leaf_index(x)]]
        gy = leaves[vperm[al.leaf_index(y)]]
        if split_level(gx, gy) != split_level(x, y):
            violator_moves = True
            break

    return {
        "gamma": gamma,
        "depth": depth,
        "classes": stats,
        "pairs": {m: rows for m, rows in classes.items()},
        "max_spread": float(spread),
        "min_interclass_gap": float(gap),
        "separated": bool(gap >= 10 * spread),
        "portraits_preserve_classes": portraits_fix,
        "violating_permutation_moves_class": violator_moves,
    }


# ---------------------------------------------------------------------------
# state pullback and random spec generators (shared by tests, demos, CLI)
# ---------------------------------------------------------------------------


class PulledBackState(al.State):
    """The state x -> base(alpha(x))."""

    def __init__(self, base: al.State, spec):
        self.base = base
        self.spec = spec

    def value(self, x):
        return self.base.value(apply_automorphism(self.spec, x))

    def to_dict(self):
        return {"variant": "pullback", "base": self.base.to_dict()}


def random_local_automorphism(
    filtration: al.Filtration, rng, permute: bool = False
) -> SlotAutomorphism:
    """Random per-slot unitaries; with ``permute`` a random slot shuffle first."""
    n, k = filtration.depth, filtration.k
    perm = (
        tuple(int(v) + 1 for v in rng.permutation(n)) if permute else tuple(range(1, n + 1))
    )
    locs = tuple(random_unitary(k, rng) for _ in range(n))
    return SlotAutomorphism(perm, locs)


def random_block_automorphism(filtration: al.Filtration, rng, width: int = 2) -> SlotAutomorphism:
    """Conjugation by a Haar unitary on a random contiguous slot group."""
    n, k = filtration.depth, filtration.k
    width = min(width, n)
    start = int(rng.integers(1, n - width + 2))
    u = random_unitary(k**width, rng)
    return SlotAutomorphism(tuple(range(1, n + 1)), None, ((start, u),))


def random_portrait(depth: int, rng) -> TreePortrait:
    return TreePortrait(depth, tuple(int(b) for b in rng.integers(0, 2, size=2**depth - 1)))


def random_leaf_permutation(depth: int, rng) -> LeafPermutation:
    return LeafPermutation(depth, tuple(int(v) for v in rng.permutation(2**depth)))
