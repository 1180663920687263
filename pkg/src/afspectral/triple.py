"""Reference-state representation with a grade-diagonal Dirac operator.

The level-N algebra acts by left multiplication on the completion of itself
under <a, b> = ref(a* b).  The canonical basis is orthonormal for the trace
and the uniform measure; for product states each tensor slot is Gram-Schmidt
orthonormalized (identity first), which keeps the graded structure intact.
Ordering is grade-major, so the projection P_n onto the span of elements of
grade <= n is a leading principal block and the Dirac operator

    D = sum_n lambda_n Q_n,     Q_n = P_n - P_{n-1},  lambda_0 = 0,

is diagonal with entry lambda_{grade} on each basis vector.
"""

from dataclasses import dataclass, field

import numpy as np

from . import algebra as al
from .errors import DegeneracyError, InvalidInputError
from .linalg import operator_norm, orthonormalize

# ---------------------------------------------------------------------------
# Dirac eigenvalue sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiracSpec:
    """Eigenvalue sequence lambda_0 = 0 < lambda_1, ..., lambda_N."""

    lambdas: tuple  # includes the leading 0
    variant: str = "explicit"
    param: float = 0.0

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam[0] != 0.0:
            raise InvalidInputError("lambda_0 must be 0")
        if len(lam) < 2 or np.any(lam[1:] <= 0) or not np.all(np.isfinite(lam)):
            raise InvalidInputError("lambda_n must be positive and finite for n >= 1")

    @property
    def depth(self) -> int:
        return len(self.lambdas) - 1

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.lambdas) > 0))

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.lambdas) >= 0))

    @property
    def pairwise_distinct(self) -> bool:
        return len(set(self.lambdas)) == len(self.lambdas)

    def to_dict(self):
        return {
            "variant": self.variant,
            "param": self.param,
            "lambdas": [float(l) for l in self.lambdas],
        }

    @staticmethod
    def from_dict(d):
        return DiracSpec(tuple(d["lambdas"]), d.get("variant", "explicit"), d.get("param", 0.0))


def dirac_explicit(lambdas) -> DiracSpec:
    """Explicit positive sequence lambda_1..lambda_N."""
    return DiracSpec((0.0, *map(float, lambdas)), "explicit")


def dirac_geometric(gamma: float, depth: int) -> DiracSpec:
    """lambda_n = gamma^(-n+1) for 0 < gamma < 1."""
    if not (0 < gamma < 1):
        raise InvalidInputError("gamma must lie in (0, 1)")
    return DiracSpec((0.0, *(gamma ** (-n + 1) for n in range(1, depth + 1))), "geometric", gamma)


def dirac_power(base: float, depth: int) -> DiracSpec:
    """lambda_n = base^(n-1) for base > 1."""
    if base <= 1:
        raise InvalidInputError("base must exceed 1")
    return DiracSpec((0.0, *(base ** (n - 1) for n in range(1, depth + 1))), "power", base)


# ---------------------------------------------------------------------------
# GNS data
# ---------------------------------------------------------------------------


@dataclass
class GNSSpace:
    """Orthonormal graded basis of the representation space at full depth."""

    filtration: al.Filtration
    state: al.State
    grades: np.ndarray              # grade of each basis vector
    stack: np.ndarray               # materializations, (dim, s, s) or (dim, leaves)
    dual_stack: np.ndarray          # pairing tensors: pi(a)_ij = sum dual[i] * (a . stack[j])
    basis_elements: list = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.grades)

    @property
    def depth(self) -> int:
        return self.filtration.depth


def _trace_gns(filtration: al.Filtration, state: al.State) -> GNSSpace:
    n = filtration.depth
    idxs = al.canonical_basis(filtration, n)
    grades = np.array([ix.grade for ix in idxs])
    if filtration.family == "uhf":
        stack = al._uhf_stack(filtration.k, n)
        dual = np.conj(stack) / filtration.k**n
    else:
        stack = al._haar_stack(n).astype(complex)
        dual = np.conj(stack) / filtration.leaf_count(n)
    elems = [
        al.AlgebraElement(filtration, n, np.eye(len(idxs), dtype=complex)[i])
        for i in range(len(idxs))
    ]
    return GNSSpace(filtration, state, grades, stack, dual, elems)


def _product_gns(filtration: al.Filtration, state: al.ProductState) -> GNSSpace:
    n = filtration.depth
    k = filtration.k
    if len(state.densities) < n:
        raise InvalidInputError(f"product state needs {n} densities")
    if not state.is_faithful_reference():
        raise DegeneracyError("product state densities must be positive definite")

    # per-slot Gram-Schmidt, identity first so grades survive
    slots = al.slot_basis(k)
    slot_frames = []
    for rho in state.densities[:n]:
        ordered = [np.eye(k, dtype=complex)] + [slots[j] for j in range(k * k - 1)]
        frame = orthonormalize(ordered, lambda a, b: np.trace(rho @ np.conj(a).T @ b))
        slot_frames.append([*frame[1:], frame[0]])  # back to identity-last labeling

    idxs = al.canonical_basis(filtration, n)
    grades = np.array([ix.grade for ix in idxs])
    size = k**n
    ident = k * k
    stack = np.empty((len(idxs), size, size), dtype=complex)
    for pos, ix in enumerate(idxs):
        labels = ix.word + (ident,) * (n - len(ix.word))
        m = np.eye(1, dtype=complex)
        for slot, lab in enumerate(labels):
            m = np.kron(m, slot_frames[slot][lab - 1])
        stack[pos] = m
    rho_full = state.density(n)
    dual = np.transpose(rho_full @ np.conj(np.transpose(stack, (0, 2, 1))), (0, 2, 1))
    elems = [al.from_matrix(filtration, n, stack[i]) for i in range(len(idxs))]
    return GNSSpace(filtration, state, grades, stack, dual, elems)


# ---------------------------------------------------------------------------
# the truncated triple
# ---------------------------------------------------------------------------


@dataclass
class TruncatedTriple:
    gns: GNSSpace
    dirac: DiracSpec
    d_diag: np.ndarray
    D: np.ndarray

    @property
    def filtration(self) -> al.Filtration:
        return self.gns.filtration

    @property
    def depth(self) -> int:
        return self.gns.depth

    @property
    def dim(self) -> int:
        return self.gns.dim

    @property
    def lambdas(self) -> np.ndarray:
        return np.asarray(self.dirac.lambdas)

    def grade_mask(self, n: int) -> np.ndarray:
        return self.gns.grades == n

    def Q(self, n: int) -> np.ndarray:
        return np.diag(self.grade_mask(n).astype(complex))

    def P(self, n: int) -> np.ndarray:
        return np.diag((self.gns.grades <= n).astype(complex))

    def represent(self, a: al.AlgebraElement) -> np.ndarray:
        """Matrix of left multiplication by ``a`` on the graded basis."""
        if a.filtration != self.filtration:
            raise InvalidInputError("filtration mismatch")
        mat = a.materialize(self.depth)
        if self.filtration.family == "uhf":
            acted = np.matmul(mat, self.gns.stack)
            return np.einsum("irp,jrp->ij", self.gns.dual_stack, acted)
        acted = mat[None, :] * self.gns.stack
        return np.einsum("il,jl->ij", self.gns.dual_stack, acted)

    def commutator(self, a: al.AlgebraElement) -> np.ndarray:
        """[D, pi(a)] as a dense matrix."""
        pa = self.represent(a)
        return self.d_diag[:, None] * pa - pa * self.d_diag[None, :]

    def commutator_norm(self, a: al.AlgebraElement) -> float:
        return operator_norm(self.commutator(a))

    def block_norms(self, a: al.AlgebraElement) -> np.ndarray:
        """Table of ||Q_i pi(a) Q_j|| over grades i, j = 0..N."""
        pa = self.represent(a)
        n = self.depth
        out = np.zeros((n + 1, n + 1))
        for i in range(n + 1):
            mi = self.grade_mask(i)
            for j in range(n + 1):
                out[i, j] = operator_norm(pa[np.ix_(mi, self.grade_mask(j))])
        return out

    def commutator_from_blocks(self, a: al.AlgebraElement) -> np.ndarray:
        """Reassemble [D, pi(a)] from weighted off-diagonal grade blocks."""
        pa = self.represent(a)
        lam = self.lambdas[self.gns.grades]
        return pa * (lam[:, None] - lam[None, :])

    def vector_of(self, a: al.AlgebraElement) -> np.ndarray:
        """GNS coefficients of a*xi, i.e. <b_i, a> in the reference inner product."""
        return self.represent(a)[:, 0]

    def to_dict(self):
        return {
            "filtration": self.filtration.to_dict(),
            "state": self.gns.state.to_dict(),
            "dirac": self.dirac.to_dict(),
        }


def build_triple(filtration: al.Filtration, state: al.State, dirac: DiracSpec) -> TruncatedTriple:
    """Assemble the truncated triple for a faithful reference state."""
    if dirac.depth != filtration.depth:
        raise InvalidInputError(
            f"dirac depth {dirac.depth} does not match filtration depth {filtration.depth}"
        )
    if isinstance(state, al.TraceState):
        if filtration.family != "uhf":
            raise InvalidInputError("trace reference needs a uhf filtration")
        gns = _trace_gns(filtration, state)
    elif isinstance(state, al.UniformState):
        if filtration.family != "cantor":
            raise InvalidInputError("uniform reference needs a cantor filtration")
        gns = _trace_gns(filtration, state)
    elif isinstance(state, al.ProductState):
        if filtration.family != "uhf":
            raise InvalidInputError("product reference needs a uhf filtration")
        gns = _product_gns(filtration, state)
    else:
        raise DegeneracyError(
            f"state {type(state).__name__} is not a faithful reference for the truncation"
        )
    lam = np.asarray(dirac.lambdas)
    d_diag = lam[gns.grades]
    return TruncatedTriple(gns, dirac, d_diag, np.diag(d_diag.astype(complex)))
