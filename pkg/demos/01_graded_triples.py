#!/usr/bin/env python3
"""Tour of the graded triples: bases, Dirac structure, commutators.

Two truncated algebra families are available: tensor powers of M_2 with the
normalized trace, and locally constant functions on binary sequences with
the uniform measure.  Both carry a graded orthonormal basis; the Dirac
operator weights grade n by lambda_n.
"""

import numpy as np

from afspectral import (
    AlgebraElement,
    TraceState,
    UniformState,
    basis_element,
    build_triple,
    canonical_basis,
    cantor,
    conditional_expectation,
    dirac_explicit,
    uhf,
)

np.set_printoptions(precision=4, suppress=True, linewidth=110)

# -- canonical bases ---------------------------------------------------------

f = uhf(2, 2)
print("tensor-power basis at level 2 (word, grade):")
for ix in canonical_basis(f, 2):
    print(f"  {str(ix.word):12s} grade {ix.grade}")

c = cantor(2)
print("\nbinary-sequence (Haar) basis at depth 2:")
for ix in canonical_basis(c, 2):
    kind = "scaling" if ix.grade == 0 else f"wavelet at node {ix.word}"
    print(f"  grade {ix.grade}: {kind}")

# -- the Dirac operator ------------------------------------------------------

triple = build_triple(f, TraceState(), dirac_explicit([1.0, 2.0]))
print("\nDirac diagonal (grade-major order):", triple.d_diag)

ctriple = build_triple(c, UniformState(), dirac_explicit([1.0, 3.0]))
print("Cantor Dirac diagonal:", ctriple.d_diag, "(multiplicities 1, 1, 2)")

# -- commutators know the grade ----------------------------------------------

s3 = basis_element(f, 1, (3,))
print("\n||[D, b*s3]|| for a few weights b:")
for b in (1.0, -2.0, 0.5j):
    print(f"  b={b}: {triple.commutator_norm(b * s3):.6f}  (matches |b|*lambda_1)")

deep = basis_element(f, 2, (4, 3))  # identity (x) s3
print(f"||[D, 1 (x) s3]|| = {triple.commutator_norm(deep):.6f}  (matches lambda_2)")

# -- block structure ---------------------------------------------------------

print("\ngrade-block norms of pi(s3):")
print(triple.block_norms(s3))

# -- conditional expectation contracts ---------------------------------------

rng = np.random.default_rng(0)
x = AlgebraElement(f, 2, rng.normal(size=16))
ex = conditional_expectation(x, 1)
print(
    f"\nrandom level-2 element: ||[D, x]|| = {triple.commutator_norm(x):.4f}, "
    f"||[D, E_1(x)]|| = {triple.commutator_norm(ex):.4f}  (never larger)"
)
