"""Group-window lifts: integer actions, cocycles, and the doubled Dirac.

A verified action of the integers on the truncated algebra is represented on
a finite symmetric window of sites {-L..L}.  The lifted Dirac operator is the
off-diagonal 2 x 2 block matrix with blocks D (x) 1 -/+ i (x) M_l, where M_l
multiplies by the site label.  Finitely supported elements sum(a_g lambda_g)
act by

    (a lambda_g)(xi (x) delta_h) = (alpha_{-(g+h)}(a) xi) (x) delta_{g+h},

truncated at the window edge; identities are therefore asserted only after
compressing onto interior columns, where no truncation occurs.  A character
cocycle chi, a rigid base automorphism beta and a label-preserving group
automorphism sigma lift to a unitary commuting with the doubled Dirac; sigma
= negation flips the label and serves as the designed failure case.
"""

from dataclasses import dataclass, field

import numpy as np

from . import algebra as al
from . import isometry as iso
from . import triple as tr
from .errors import (
    InvalidInputError,
    PreconditionError,
    WindowTooSmallError,
)
from .linalg import TOL, operator_norm

# ---------------------------------------------------------------------------
# actions of the integers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrivialAction:
    pass


@dataclass(frozen=True)
class OdometerAction:
    """Add-one-with-carry on the binary sequence space (cantor bases only)."""


@dataclass(frozen=True)
class IsoPowerAction:
    """Integer powers of a fixed rigid automorphism."""

    generator: object


def _generator_spec(action, filtration: al.Filtration):
    if isinstance(action, TrivialAction):
        return None
    if isinstance(action, OdometerAction):
        if filtration.family != "cantor":
            raise InvalidInputError("odometer acts on cantor filtrations")
        return iso.odometer_portrait(filtration.depth)
    if isinstance(action, IsoPowerAction):
        return action.generator
    raise InvalidInputError(f"unknown action {type(action).__name__}")


def apply_action(action, g: int, x: al.AlgebraElement) -> al.AlgebraElement:
    """alpha_g(x) for the integer action."""
    gen = _generator_spec(action, x.filtration)
    if gen is None or g == 0:
        return x.embed(x.filtration.depth)
    spec = gen if g > 0 else iso.invert(gen)
    out = x
    for _ in range(abs(g)):
        out = iso.apply_automorphism(spec, out)
    return out


def verify_action(action, base: tr.TruncatedTriple) -> dict:
    """Check the generator is a rigid automorphism of the base triple."""
    gen = _generator_spec(action, base.filtration)
    if gen is None:
        return {"action": "trivial", "verified": True}
    verdict = iso.iso_check(base, gen)
    report = {
        "action": type(action).__name__,
        "verified": bool(verdict.in_iso),
        "state_preserved": verdict.state_preserved,
        "filtration_levels": verdict.filtration_levels_preserved,
    }
    if not verdict.in_iso:
        raise InvalidInputError("action generator is not a rigid automorphism of the base")
    return report


# ---------------------------------------------------------------------------
# cocycles, windows, crossed elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cocycle:
    """Scalar character cocycle c(g) = chi^g."""

    chi: complex

    def __post_init__(self):
        if abs(abs(complex(self.chi)) - 1.0) > 1e-12:
            raise InvalidInputError("character must have unit modulus")

    def value(self, g: int) -> complex:
        return complex(self.chi) ** g


@dataclass(frozen=True)
class GroupWindow:
    """Sites {-L..L} with l(n) = n and a declared interior margin."""

    radius: int
    margin: int

    def __post_init__(self):
        if self.radius <= self.margin:
            raise WindowTooSmallError(
                f"window radius {self.radius} must exceed the margin {self.margin}"
            )
        if self.margin < 0:
            raise InvalidInputError("margin must be nonnegative")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.radius, self.radius + 1)

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    def interior_mask(self) -> np.ndarray:
        return np.abs(self.sites) <= self.radius - self.margin


@dataclass
class CrossedElement:
    """Finitely supported map g -> algebra element."""

    terms: dict

    def __post_init__(self):
        filts = {a.filtration for a in self.terms.values()}
        if len(filts) > 1:
            raise InvalidInputError("all coefficients must share one filtration")

    @property
    def support_radius(self) -> int:
        return max((abs(g) for g in self.terms), default=0)

    def adjoint(self, action) -> "CrossedElement":
        out = {}
        for g, a in self.terms.items():
            img = apply_action(action, -g, a.adjoint())
            out[-g] = out[-g] + img if -g in out else img
        return CrossedElement(out)

    def multiply(self, other: "CrossedElement", action) -> "CrossedElement":
        out = {}
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                term = a * apply_action(action, g, b)
                out[g + h] = out[g + h] + term if g + h in out else term
        return CrossedElement(out)


# ---------------------------------------------------------------------------
# the lifted triple
# ---------------------------------------------------------------------------


@dataclass
class LiftedTriple:
    base: tr.TruncatedTriple
    action: object
    window: GroupWindow
    t_minus: np.ndarray = field(repr=False, default=None)
    t_plus: np.ndarray = field(repr=False, default=None)
    d_l: np.ndarray = field(repr=False, default=None)
    m_l: np.ndarray = field(repr=False, default=None)
    action_report: dict = None

    @property
    def half_dim(self) -> int:
        return self.base.dim * self.window.size

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    def site_block(self, r: int, c: int):
        d = self.base.dim
        s = self.window.radius
        return slice((r + s) * d, (r + s + 1) * d), slice((c + s) * d, (c + s + 1) * d)

    def interior_columns(self, doubled: bool = False) -> np.ndarray:
        mask = np.repeat(self.window.interior_mask(), self.base.dim)
        return np.concatenate([mask, mask]) if doubled else mask


def build_lifted(
    base: tr.TruncatedTriple, action, radius: int, margin: int = 2
) -> LiftedTriple:
    """Assemble the doubled Dirac on the site window."""
    if radius < 2:
        raise InvalidInputError("window radius must be at least 2")
    report = verify_action(action, base)
    window = GroupWindow(radius, margin)
    d = base.dim
    s = window.size
    # site-major flat index: site * dim + basis vector
    d_site = np.kron(np.eye(s, dtype=complex), np.diag(base.d_diag.astype(complex)))
    m_site = np.kron(np.diag(window.sites.astype(complex)), np.eye(d, dtype=complex))
    t_minus = d_site - 1j * m_site
    t_plus = d_site + 1j * m_site
    zero = np.zeros_like(t_minus)
    d_l = np.block([[zero, t_minus], [t_plus, zero]])
    return LiftedTriple(base, action, window, t_minus, t_plus, d_l, m_site, report)


def represent_crossed(lifted: LiftedTriple, x: CrossedElement) -> np.ndarray:
    """Action of a crossed element on one copy of H (x) l2(window)."""
    r_max = x.support_radius
    if r_max > lifted.window.margin:
        raise WindowTooSmallError(
            f"support radius {r_max} exceeds the window margin {lifted.window.margin}"
        )
    out = np.zeros((lifted.half_dim, lifted.half_dim), dtype=complex)
    rad = lifted.window.radius
    for g, a in x.terms.items():
        for h in range(-rad, rad + 1):
            tgt = g + h
            if abs(tgt) > rad:
                continue
            rows, cols = lifted.site_block(tgt, h)
            out[rows, cols] += lifted.base.represent(apply_action(lifted.action, -tgt, a))
    return out


def doubled(op: np.ndarray) -> np.ndarray:
    """Diagonal two-block copy."""
    z = np.zeros_like(op)
    return np.block([[op, z], [z, op]])


def lifted_unitary(
    lifted: LiftedTriple,
    cocycle: Cocycle,
    beta,
    sigma: str = "id",
    check_rigidity: bool = True,
) -> np.ndarray:
    """Unitary xi (x) delta_g -> (c_{sigma(-g)}* U_beta xi) (x) delta_{sigma(g)}.

    ``beta`` is an automorphism spec of the base (None for the identity).
    With ``check_rigidity`` the base verdict must be in the rigid group; the
    designed failure cases pass False to build the unitary anyway.
    """
    if sigma not in ("id", "neg"):
        raise InvalidInputError("sigma must be 'id' or 'neg'")
    base = lifted.base
    filt = base.filtration
    if beta is None:
        u_beta = np.eye(base.dim, dtype=complex)
    else:
        if check_rigidity and not iso.iso_check(base, beta).in_iso:
            raise PreconditionError("beta is not in the rigid group of the base triple")
        u_beta = iso.implementing_unitary(base, beta)

    # intertwining on the generator: beta o alpha_1 = alpha_{sigma(1)} o beta
    gen = _generator_spec(lifted.action, filt)
    if gen is not None:
        a_gen = iso.coefficient_images(gen, filt)
        # rigid generators preserve the reference inner product, so the
        # coefficient matrix is unitary and the inverse power is its adjoint
        a_gen_s = a_gen if sigma == "id" else np.conj(a_gen).T
        a_beta = (
            np.eye(filt.dim(filt.depth), dtype=complex)
            if beta is None
            else iso.coefficient_images(beta, filt)
        )
        if operator_norm(a_beta @ a_gen - a_gen_s @ a_beta) > TOL.structural:
            raise PreconditionError(
                "intertwining beta o alpha_g = alpha_{sigma(g)} o beta fails"
            )

    rad = lifted.window.radius
    u = np.zeros((lifted.half_dim, lifted.half_dim), dtype=complex)
    for g in range(-rad, rad + 1):
        tgt = g if sigma == "id" else -g
        # coefficient c_{sigma(-g)}^*: sigma(-g) = -g for id, g for neg
        coeff = np.conj(cocycle.value(-g if sigma == "id" else g))
        rows, cols = lifted.site_block(tgt, g)
        u[rows, cols] = coeff * u_beta
    return u


def lift_commutation_check(lifted: LiftedTriple, u_half: np.ndarray) -> dict:
    """Interior residual of [D_l, U + U]; passes at the crossed tolerance."""
    u2 = doubled(u_half)
    comm = lifted.d_l @ u2 - u2 @ lifted.d_l
    resid = operator_norm(comm[:, lifted.interior_columns(doubled=True)])
    return {"residual": float(resid), "passes": bool(resid <= TOL.crossed)}


def automorphism_image(
    lifted: LiftedTriple, cocycle: Cocycle, beta, sigma: str, x: CrossedElement
) -> CrossedElement:
    """The lifted automorphism on coefficients: sum beta(a_g) c_{sigma(g)} lambda_{sigma(g)}."""
    out = {}
    for g, a in x.terms.items():
        tgt = g if sigma == "id" else -g
        img = a.embed(a.filtration.depth) if beta is None else iso.apply_automorphism(beta, a)
        out[tgt] = img * cocycle.value(tgt)
    return CrossedElement(out)


def covariance_check(
    lifted: LiftedTriple,
    cocycle: Cocycle,
    beta,
    sigma: str,
    x: CrossedElement,
    check_rigidity: bool = True,
) -> dict:
    """Interior residual of pi(Phi(x)) U - U pi(x) on one block."""
    u = lifted_unitary(lifted, cocycle, beta, sigma, check_rigidity)
    lhs = represent_crossed(lifted, automorphism_image(lifted, cocycle, beta, sigma, x))
    rhs = represent_crossed(lifted, x)
    resid = operator_norm((lhs @ u - u @ rhs)[:, lifted.interior_columns()])
    return {"residual": float(resid), "passes": bool(resid <= TOL.crossed)}


def crossed_commutator_stability(
    base: tr.TruncatedTriple, action, x: CrossedElement, radii=None, margin: int | None = None
) -> dict:
    """Interior commutator norms across window radii; they settle immediately
    once every column sees the full action orbit, because the action is rigid."""
    r = x.support_radius
    margin = r if margin is None else margin
    radii = list(radii) if radii is not None else list(range(max(r + 1, 2), r + 6))
    norms = []
    for rad in radii:
        lifted = build_lifted(base, action, rad, margin)
        op = doubled(represent_crossed(lifted, x))
        comm = lifted.d_l @ op - op @ lifted.d_l
        norms.append(float(operator_norm(comm[:, lifted.interior_columns(doubled=True)])))
    diffs = [abs(b - a) for a, b in zip(norms, norms[1:])]
    stable = all(d <= 1e-8 for d in diffs[1:]) if len(diffs) > 1 else True
    return {"radii": radii, "norms": norms, "differences": diffs, "stabilized": stable}
