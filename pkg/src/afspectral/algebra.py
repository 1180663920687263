"""Finite truncations of two filtered operator-algebra families.

Two families are modeled:

* ``uhf``   -- tensor powers of a full matrix algebra M_k.  Level n is
  M_k^(x n), of dimension k^(2n), with the normalized trace as reference
  state.  The canonical basis tensors a fixed self-adjoint orthonormal
  single-slot system (for k = 2 the Pauli matrices with the identity last).
* ``cantor`` -- locally constant functions on the binary sequence space.
  Level n is C^(2^n) (functions constant on depth-n cylinders) with the
  uniform measure as reference state and the Haar system as canonical basis.

Every basis index carries a *grade*: the deepest slot (or node depth) where
it differs from the identity.  Level-n truncations embed in level-m ones
(n <= m) as the grade <= n coefficient subspace, and the canonical ordering
is grade-major, so the level-n basis is literally a prefix of the level-m
basis.  All higher modules rely on that prefix property.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import InvalidInputError
from .linalg import TOL

# ---------------------------------------------------------------------------
# filtrations and basis indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Filtration:
    """A filtered-algebra family truncated at ``depth`` levels."""

    family: str  # "uhf" or "cantor"
    depth: int
    k: int = 2  # single-slot matrix size; only meaningful for "uhf"

    def __post_init__(self):
        if self.family not in ("uhf", "cantor"):
            raise InvalidInputError(f"unknown family {self.family!r}")
        if self.family == "uhf" and self.k < 2:
            raise InvalidInputError("uhf factor size must be >= 2")
        if self.depth < 1:
            raise InvalidInputError("depth must be >= 1")

    def dim(self, level: int) -> int:
        """Linear dimension of the level-n algebra."""
        self._check_level(level)
        return self.k ** (2 * level) if self.family == "uhf" else 2**level

    def leaf_count(self, level: int) -> int:
        if self.family != "cantor":
            raise InvalidInputError("leaf_count only applies to cantor")
        return 2**level

    def _check_level(self, level: int):
        if not (0 <= level <= self.depth):
            raise InvalidInputError(f"level {level} outside 0..{self.depth}")

    def to_dict(self):
        d = {"family": self.family, "depth": self.depth}
        if self.family == "uhf":
            d["k"] = self.k
        return d

    @staticmethod
    def from_dict(d):
        return Filtration(d["family"], d["depth"], d.get("k", 2))


def uhf(k: int, depth: int) -> Filtration:
    return Filtration("uhf", depth, k)


def cantor(depth: int) -> Filtration:
    return Filtration("cantor", depth)


@dataclass(frozen=True)
class BasisIndex:
    """Canonical basis label.

    For ``uhf`` the word lists 1-based slot labels up to the last
    non-identity slot (label k*k is the identity slot and never trails).
    For ``cantor`` the word is the node address of a Haar wavelet; the
    scaling function is the unique grade-0 index with empty word.
    """

    word: tuple
    grade: int


@lru_cache(maxsize=None)
def _uhf_indices(k: int, level: int):
    out = [BasisIndex((), 0)]
    ident = k * k
    for g in range(1, level + 1):
        words = sorted(
            w for w in product(range(1, ident + 1), repeat=g) if w[-1] != ident
        )
        out.extend(BasisIndex(w, g) for w in words)
    return tuple(out)


@lru_cache(maxsize=None)
def _cantor_indices(level: int):
    out = [BasisIndex((), 0)]
    for g in range(1, level + 1):
        for node in sorted(product((0, 1), repeat=g - 1)):
            out.append(BasisIndex(node, g))
    return tuple(out)


def canonical_basis(filtration: Filtration, level: int):
    """Ordered basis indices at a level, sorted by (grade, word)."""
    filtration._check_level(level)
    if filtration.family == "uhf":
        return _uhf_indices(filtration.k, level)
    return _cantor_indices(level)


# ---------------------------------------------------------------------------
# single-slot system and materialization
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def slot_basis(k: int) -> np.ndarray:
    """Self-adjoint single-slot basis, orthonormal for the normalized trace.

    Order: off-diagonal symmetric pairs, off-diagonal antisymmetric pairs,
    traceless diagonal combinations, identity last.  For k = 2 this is
    exactly (sigma_1, sigma_2, sigma_3, identity).
    """
    mats = []
    s = np.sqrt(k / 2.0)
    for i in range(k):
        for j in range(i + 1, k):
            m = np.zeros((k, k), dtype=complex)
            m[i, j] = m[j, i] = s
            mats.append(m)
    for i in range(k):
        for j in range(i + 1, k):
            m = np.zeros((k, k), dtype=complex)
            m[i, j] = -1j * s
            m[j, i] = 1j * s
            mats.append(m)
    for l in range(1, k):
        m = np.zeros((k, k), dtype=complex)
        scale = np.sqrt(k / (l * (l + 1.0)))
        for mm in range(l):
            m[mm, mm] = scale
        m[l, l] = -l * scale
        mats.append(m)
    mats.append(np.eye(k, dtype=complex))
    return np.stack(mats)


@lru_cache(maxsize=None)
def _uhf_stack(k: int, level: int) -> np.ndarray:
    """Stacked materializations of the level-n uhf basis, shape (dim, k^n, k^n)."""
    slots = slot_basis(k)
    ident = k * k
    idxs = _uhf_indices(k, level)
    dim = k ** (2 * level)
    size = k**level
    out = np.empty((dim, size, size), dtype=complex)
    for pos, ix in enumerate(idxs):
        labels = ix.word + (ident,) * (level - len(ix.word))
        m = np.eye(1, dtype=complex)
        for lab in labels:
            m = np.kron(m, slots[lab - 1])
        out[pos] = m
    return out


@lru_cache(maxsize=None)
def _haar_stack(level: int) -> np.ndarray:
    """Haar system as leaf-value rows, shape (2^n, 2^n); rows follow the index order."""
    n_leaves = 2**level
    idxs = _cantor_indices(level)
    out = np.zeros((len(idxs), n_leaves), dtype=float)
    out[0, :] = 1.0
    for pos, ix in enumerate(idxs[1:], start=1):
        g = ix.grade
        amp = 2 ** ((g - 1) / 2.0)
        node_val = 0
        for b in ix.word:
            node_val = 2 * node_val + b
        span = 2 ** (level - g)  # leaves per child cylinder
        start = node_val * 2 * span
        out[pos, start : start + span] = amp
        out[pos, start + span : start + 2 * span] = -amp
    return out


def leaf_index(word) -> int:
    """Leaf position of a full-depth binary word, most significant bit first."""
    v = 0
    for b in word:
        v = 2 * v + int(b)
    return v


# ---------------------------------------------------------------------------
# algebra elements
# ---------------------------------------------------------------------------


@dataclass
class AlgebraElement:
    """Coefficient vector over the canonical basis of one truncation level."""

    filtration: Filtration
    level: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        dim = self.filtration.dim(self.level)
        if self.coeffs.shape != (dim,):
            raise InvalidInputError(
                f"coefficient vector has shape {self.coeffs.shape}, expected ({dim},)"
            )

    # -- structure ---------------------------------------------------------

    @property
    def grade(self) -> int:
        idxs = canonical_basis(self.filtration, self.level)
        nz = np.nonzero(np.abs(self.coeffs) > 1e-14)[0]
        return int(idxs[nz[-1]].grade) if len(nz) else 0

    def is_selfadjoint(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs.imag), initial=0.0) <= tol)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.filtration, self.level, np.conj(self.coeffs))

    def embed(self, level: int) -> "AlgebraElement":
        """View at a deeper level; the grade-major order makes this a zero-pad."""
        if level < self.level:
            raise InvalidInputError("embed target below current level")
        self.filtration._check_level(level)
        out = np.zeros(self.filtration.dim(level), dtype=complex)
        out[: len(self.coeffs)] = self.coeffs
        return AlgebraElement(self.filtration, level, out)

    def restrict(self, level: int) -> "AlgebraElement":
        """Inverse of :meth:`embed`; requires vanishing coefficients above the level."""
        if level > self.level:
            raise InvalidInputError("restrict target above current level")
        dim = self.filtration.dim(level)
        if np.max(np.abs(self.coeffs[dim:]), initial=0.0) > 1e-12:
            raise InvalidInputError("element does not lie in the target level")
        return AlgebraElement(self.filtration, level, self.coeffs[:dim].copy())

    # -- arithmetic ----------------------------------------------------------

    def _common(self, other):
        if self.filtration != other.filtration:
            raise InvalidInputError("filtration mismatch")
        lev = max(self.level, other.level)
        return self.embed(lev), other.embed(lev), lev

    def __add__(self, other):
        a, b, lev = self._common(other)
        return AlgebraElement(self.filtration, lev, a.coeffs + b.coeffs)

    def __sub__(self, other):
        a, b, lev = self._common(other)
        return AlgebraElement(self.filtration, lev, a.coeffs - b.coeffs)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return AlgebraElement(self.filtration, self.level, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    # -- materialization -----------------------------------------------------

    def materialize(self, level: int | None = None) -> np.ndarray:
        """Dense form: a k^n x k^n matrix (uhf) or a leaf-value vector (cantor)."""
        lev = self.level if level is None else level
        x = self.embed(lev) if lev != self.level else self
        if self.filtration.family == "uhf":
            return np.tensordot(x.coeffs, _uhf_stack(self.filtration.k, lev), axes=1)
        return x.coeffs @ _haar_stack(lev)

    def to_dict(self):
        return {
            "filtration": self.filtration.to_dict(),
            "level": self.level,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @staticmethod
    def from_dict(d):
        coeffs = np.array([complex(re, im) for re, im in d["coeffs"]])
        return AlgebraElement(Filtration.from_dict(d["filtration"]), d["level"], coeffs)


def identity_element(filtration: Filtration, level: int = 0) -> AlgebraElement:
    c = np.zeros(filtration.dim(level), dtype=complex)
    c[0] = 1.0
    return AlgebraElement(filtration, level, c)


def basis_element(filtration: Filtration, level: int, word) -> AlgebraElement:
    idxs = canonical_basis(filtration, level)
    target = tuple(word)
    c = np.zeros(len(idxs), dtype=complex)
    for pos, ix in enumerate(idxs):
        if ix.word == target:
            c[pos] = 1.0
            return AlgebraElement(filtration, level, c)
    raise InvalidInputError(f"word {target} not in level-{level} basis")


def from_matrix(filtration: Filtration, level: int, mat) -> AlgebraElement:
    """Decompose a dense k^n x k^n matrix over the canonical uhf basis."""
    if filtration.family != "uhf":
        raise InvalidInputError("from_matrix applies to uhf filtrations")
    stack = _uhf_stack(filtration.k, level)
    size = filtration.k**level
    m = np.asarray(mat, dtype=complex)
    if m.shape != (size, size):
        raise InvalidInputError(f"matrix shape {m.shape}, expected ({size},{size})")
    coeffs = np.einsum("iab,ab->i", np.conj(stack), m) / size
    return AlgebraElement(filtration, level, coeffs)


def from_values(filtration: Filtration, level: int, values) -> AlgebraElement:
    """Decompose a leaf-value vector over the Haar basis."""
    if filtration.family != "cantor":
        raise InvalidInputError("from_values applies to cantor filtrations")
    v = np.asarray(values, dtype=complex)
    n = filtration.leaf_count(level)
    if v.shape != (n,):
        raise InvalidInputError(f"value vector shape {v.shape}, expected ({n},)")
    coeffs = _haar_stack(level) @ v / n
    return AlgebraElement(filtration, level, coeffs)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Algebra product; bilinear and associative, via dense materialization."""
    x, y, lev = a._common(b)
    if a.filtration.family == "uhf":
        return from_matrix(a.filtration, lev, x.materialize() @ y.materialize())
    return from_values(a.filtration, lev, x.materialize() * y.materialize())


def conditional_expectation(x: AlgebraElement, level: int) -> AlgebraElement:
    """Reference-state averaging onto the level-n subalgebra.

    Keeps exactly the grade <= n coefficients; idempotent, unital, positive,
    and trace preserving.
    """
    if level > x.level:
        raise InvalidInputError("target level above the element's level")
    dim = x.filtration.dim(level)
    return AlgebraElement(x.filtration, level, x.coeffs[:dim].copy())


def shift_embed(x: AlgebraElement, n: int) -> AlgebraElement:
    """Prepend ``n`` identity slots (new leading tensor legs or tree levels)."""
    if n < 0:
        raise InvalidInputError("shift count must be >= 0")
    lev = x.level + n
    if lev > x.filtration.depth:
        raise InvalidInputError("shift exceeds the truncation depth")
    if n == 0:
        return AlgebraElement(x.filtration, x.level, x.coeffs.copy())
    if x.filtration.family == "uhf":
        k = x.filtration.k
        mat = np.kron(np.eye(k**n, dtype=complex), x.materialize())
        return from_matrix(x.filtration, lev, mat)
    vals = np.tile(x.materialize(), 2**n)
    return from_values(x.filtration, lev, vals)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


class State:
    """Positive unital linear functional, evaluable on :class:`AlgebraElement`."""

    def value(self, x: AlgebraElement) -> complex:
        raise NotImplementedError

    def is_faithful_reference(self) -> bool:
        return False

    def to_dict(self):
        raise NotImplementedError


class TraceState(State):
    """Normalized trace on a uhf filtration."""

    def value(self, x):
        if x.filtration.family != "uhf":
            raise InvalidInputError("trace applies to uhf filtrations")
        return complex(x.coeffs[0])

    def is_faithful_reference(self):
        return True

    def to_dict(self):
        return {"variant": "trace"}


class UniformState(State):
    """Uniform measure on a cantor filtration."""

    def value(self, x):
        if x.filtration.family != "cantor":
            raise InvalidInputError("uniform measure applies to cantor filtrations")
        return complex(x.coeffs[0])

    def is_faithful_reference(self):
        return True

    def to_dict(self):
        return {"variant": "uniform"}


class VectorState(State):
    """State a -> <v xi, a v xi> in the reference representation.

    ``v`` is a level-n element normalized so the reference state gives
    ref(v* v) = 1; deficit tensor slots of the argument are filled with
    the identity.
    """

    def __init__(self, v: AlgebraElement):
        self.v = v
        self.level = v.level
        norm = self.value(identity_element(v.filtration, 0))
        if abs(norm - 1.0) > TOL.structural:
            raise InvalidInputError(f"vector not normalized: ref(v*v) = {norm}")

    def value(self, x):
        if x.filtration != self.v.filtration:
            raise InvalidInputError("filtration mismatch")
        lev = max(self.level, x.level)
        if x.filtration.family == "uhf":
            vm = self.v.materialize(lev)
            xm = x.materialize(lev)
            size = x.filtration.k**lev
            return complex(np.trace(np.conj(vm).T @ xm @ vm) / size)
        vm = self.v.materialize(lev)
        xm = x.materialize(lev)
        return complex(np.mean(np.conj(vm) * xm * vm))

    def to_dict(self):
        return {"variant": "vector", "v": self.v.to_dict()}


class CharacterState(State):
    """Point evaluation at the sequence starting with ``word`` (cantor only)."""

    def __init__(self, word):
        self.word = tuple(int(b) for b in word)
        if any(b not in (0, 1) for b in self.word):
            raise InvalidInputError("character word must be binary")

    def value(self, x):
        if x.filtration.family != "cantor":
            raise InvalidInputError("characters apply to cantor filtrations")
        if x.level > len(self.word):
            raise InvalidInputError(
                f"character word of length {len(self.word)} cannot evaluate level {x.level}"
            )
        vals = x.materialize()
        return complex(vals[leaf_index(self.word[: x.level])])

    def to_dict(self):
        return {"variant": "character", "word": list(self.word)}


class ProductState(State):
    """Tensor product of single-slot densities on a uhf filtration."""

    def __init__(self, densities):
        self.densities = [np.asarray(d, dtype=complex) for d in densities]
        for d in self.densities:
            if d.ndim != 2 or d.shape[0] != d.shape[1]:
                raise InvalidInputError("densities must be square matrices")
            if np.max(np.abs(d - np.conj(d).T)) > 1e-12:
                raise InvalidInputError("densities must be Hermitian")
            if abs(np.trace(d) - 1.0) > 1e-12:
                raise InvalidInputError("densities must have unit trace")
            if np.min(np.linalg.eigvalsh(d)) < -1e-12:
                raise InvalidInputError("densities must be positive")

    def is_faithful_reference(self):
        return all(np.min(np.linalg.eigvalsh(d)) > 1e-12 for d in self.densities)

    def density(self, level: int) -> np.ndarray:
        if level > len(self.densities):
            raise InvalidInputError("not enough densities for the requested level")
        rho = np.eye(1, dtype=complex)
        for d in self.densities[:level]:
            rho = np.kron(rho, d)
        return rho

    def value(self, x):
        if x.filtration.family != "uhf":
            raise InvalidInputError("product states apply to uhf filtrations")
        return complex(np.trace(self.density(x.level) @ x.materialize()))

    def to_dict(self):
        return {
            "variant": "product",
            "densities": [
                [[[float(z.real), float(z.imag)] for z in row] for row in d]
                for d in self.densities
            ],
        }


def state_from_dict(d) -> State:
    v = d["variant"]
    if v == "trace":
        return TraceState()
    if v == "uniform":
        return UniformState()
    if v == "vector":
        return VectorState(AlgebraElement.from_dict(d["v"]))
    if v == "character":
        return CharacterState(d["word"])
    if v == "product":
        dens = [
            np.array([[complex(re, im) for re, im in row] for row in mat])
            for mat in d["densities"]
        ]
        return ProductState(dens)
    raise InvalidInputError(f"unknown state variant {v!r}")


def evaluate_state(state: State, x: AlgebraElement) -> complex:
    return state.value(x)


def vanishing_level(state: State, filtration: Filtration, depth: int | None = None) -> int:
    """Smallest m with state(e) = 0 for every basis index of grade > m."""
    n = filtration.depth if depth is None else depth
    idxs = canonical_basis(filtration, n)
    m = 0
    for pos, ix in enumerate(idxs):
        if ix.grade == 0:
            continue
        c = np.zeros(len(idxs), dtype=complex)
        c[pos] = 1.0
        if abs(state.value(AlgebraElement(filtration, n, c))) > 1e-12:
            m = max(m, ix.grade)
    return m
