"""Discrete differential complexes: exactness, commuting diagrams, stability.

A DiscreteComplex chains global spaces W_0 -> W_1 -> ... together with
the assembled derivative matrices between consecutive pairs.  The
checks certify the structural facts the element construction promises:

* d o d = 0 and the cohomology dimensions match the Betti numbers of
  the domain (check_exactness; rank arithmetic, with an exact integer
  cross-check against combinatorial incidence at lowest order),
* the canonical projections commute with the derivatives on smooth
  fields (check_commuting over a fixed monomial battery),
* quantitative saddle-point stability for a tail pair: the inf-sup
  constant (compute_infsup) and coercivity on the divergence-free
  kernel (check_s1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .linalg import (as_dense, check_symmetric, cholesky_solve,
                     generalized_symmetric_eig, integer_rank, numerical_rank)
from .mesh import Mesh
from .poly import Poly, VecPoly, grad, monomial_exponents
from .spaces import DiscreteSpace, assemble_derivative, build_space, canonical_projection

# composition residual above this (relative to the factor magnitudes)
# disqualifies the pair of matrices from being a complex at all
DD_RTOL = 1e-12
# singular values of B below this (relative) are treated as null
# directions of B^T and deflated from the inf-sup eigenproblem
DEFLATION_RTOL = 1e-10
# commuting/kernel checks are quadrature-exact; residuals are roundoff
BATTERY_DEGREE = 3

_FAMILY_CHAINS = {
    (2, 1): ("lagrange1", "edge1", "dg0"),
    (2, 2): ("lagrange2", "edge2", "dg1"),
    (3, 1): ("lagrange1_3d", "edge1_3d", "face1_3d", "dg0_3d"),
}


class NotAComplexError(RuntimeError):
    """Composition of two consecutive derivative matrices is nonzero."""


@dataclass(frozen=True)
class DiscreteComplex:
    """Spaces W_0..W_n over one mesh with derivatives D_k: W_k -> W_{k+1}.

    resolved_dim is the dimension of the leading kernel the complex
    resolves (1 for the constants in the de Rham case).
    """

    spaces: tuple
    derivatives: tuple
    resolved_dim: int = 1

    def __post_init__(self):
        if len(self.derivatives) != len(self.spaces) - 1:
            raise ValueError("need one derivative matrix per consecutive pair")
        mesh = self.spaces[0].mesh
        for s in self.spaces:
            if s.mesh is not mesh:
                raise ValueError("complex spaces must share one mesh")
        for k, D in enumerate(self.derivatives):
            want = (self.spaces[k + 1].ndofs, self.spaces[k].ndofs)
            if D.shape != want:
                raise ValueError(f"derivative {k} has shape {D.shape}, expected {want}")

    def __len__(self):
        return len(self.spaces)

    @property
    def mesh(self) -> Mesh:
        return self.spaces[0].mesh

    @property
    def family_names(self):
        return tuple(s.family.name for s in self.spaces)

    @property
    def lowest_order(self) -> bool:
        """One DOF per mesh entity at every level (Whitney-form chains)."""
        return self.family_names in (_FAMILY_CHAINS[2, 1], _FAMILY_CHAINS[3, 1])

    def restricted_derivative(self, k: int):
        """D_k on the free DOFs (identical to D_k without essential BC)."""
        D = self.derivatives[k].tocsr()
        return D[self.spaces[k + 1].free, :][:, self.spaces[k].free]


def derham_complex(mesh: Mesh, order: int = 1, bc: str = "none") -> DiscreteComplex:
    """The graded scalar-vector-density chain over a mesh.

    2D: lagrange_p -grad-> edge_p -curl-> dg_{p-1} for order p in {1, 2};
    3D: lagrange1 -grad-> edge1 -curl-> face1 -div-> dg0 (order 1 only).
    """
    chain = _FAMILY_CHAINS.get((mesh.dim, order))
    if chain is None:
        raise ValueError(f"no order {order} complex on {mesh.dim}D meshes")
    spaces = tuple(build_space(mesh, name, bc=bc) for name in chain)
    derivs = tuple(assemble_derivative(a, b) for a, b in zip(spaces, spaces[1:]))
    return DiscreteComplex(spaces, derivs)


def incidence_matrix(mesh: Mesh, k: int) -> np.ndarray:
    """Signed coboundary matrix from k-entities to (k+1)-entities.

    Entities carry ascending vertex tuples; the entry for the facet of
    (v_0..v_{k+1}) that drops v_i is (-1)^i.  Integer-valued, so exact
    rank arithmetic applies (linalg.integer_rank).
    """
    if not 0 <= k < mesh.dim:
        raise ValueError(f"no coboundary from dimension {k} on a {mesh.dim}D mesh")
    high = mesh.entities[k + 1]
    M = np.zeros((high.shape[0], mesh.num_entities(k)), dtype=np.int64)
    for row, verts in enumerate(high.tolist()):
        for i in range(k + 2):
            facet = tuple(verts[:i] + verts[i + 1:])
            M[row, mesh.entity_id(k, facet)] = (-1) ** i
    return M


# -- exactness -----------------------------------------------------------------


@dataclass(frozen=True)
class LevelReport:
    dim: int
    rank: int
    kernel: int
    cohomology: int


@dataclass(frozen=True)
class ComplexReport:
    levels: tuple
    alternating_sum: int
    expected_betti: tuple
    passed: bool

    def to_dict(self):
        return {
            "levels": [{"dim": lv.dim, "rank": lv.rank, "kernel": lv.kernel,
                        "cohomology": lv.cohomology} for lv in self.levels],
            "alternating_sum": self.alternating_sum,
            "expected_betti": list(self.expected_betti),
            "pass": self.passed,
        }


def check_exactness(cx: DiscreteComplex, expected_betti) -> ComplexReport:
    """Cohomology dimensions of the complex versus expected Betti numbers.

    Works on the free DOFs, so a bc="none" complex reports the absolute
    cohomology of the domain and a bc="essential" complex the relative
    one.  Raises NotAComplexError if any composition D_{k+1} D_k fails
    to vanish; cohomology at level k is dim ker D_k - rank D_{k-1} by
    rank-nullity.  At lowest order every float rank is cross-checked
    against exact integer elimination on the combinatorial incidence
    matrix (mismatch raises, it would mean a broken assembly).
    """
    expected = tuple(int(b) for b in expected_betti)
    if len(expected) != len(cx):
        raise ValueError(f"expected_betti needs {len(cx)} entries, got {len(expected)}")

    mats = [as_dense(cx.restricted_derivative(k)) for k in range(len(cx) - 1)]
    for k in range(len(mats) - 1):
        err = np.abs(mats[k + 1] @ mats[k]).max() if mats[k].size and mats[k + 1].size else 0.0
        scale = max(1.0, _absmax(mats[k]) * _absmax(mats[k + 1]))
        if err > DD_RTOL * scale:
            raise NotAComplexError(f"not a complex: |D{k + 1} D{k}| = {err:.3e}")

    ranks = [numerical_rank(D) for D in mats] + [0]
    if cx.lowest_order:
        for k, rank in enumerate(ranks[:-1]):
            sub = incidence_matrix(cx.mesh, k)[np.ix_(cx.spaces[k + 1].free,
                                                      cx.spaces[k].free)]
            exact = integer_rank(sub)
            if rank != exact:
                raise RuntimeError(
                    f"rank cross-check failed at level {k}: float {rank}, integer {exact}")

    levels = []
    for k, space in enumerate(cx.spaces):
        dim = space.num_free
        kernel = dim - ranks[k]
        image_below = ranks[k - 1] if k > 0 else 0
        levels.append(LevelReport(dim, ranks[k], kernel, kernel - image_below))
    alternating = sum((-1) ** k * lv.dim for k, lv in enumerate(levels))
    # rank-nullity makes the cohomology Euler sum equal the dimension sum
    assert alternating == sum((-1) ** k * lv.cohomology for k, lv in enumerate(levels))
    passed = all(lv.cohomology == b for lv, b in zip(levels, expected))
    return ComplexReport(tuple(levels), alternating, expected, passed)


def _absmax(A):
    return float(np.abs(A).max()) if A.size else 0.0


def _sym(A):
    return 0.5 * (A + A.T)


# -- commuting diagrams --------------------------------------------------------


def _battery(family, degree):
    """Monomial test fields (u, du) shaped for a family's value type."""
    dim = family.mesh_dim
    exps = monomial_exponents(dim, degree)
    if family.value_kind == "scalar":
        for e in exps:
            u = Poly.monomial(dim, e)
            yield u, grad(u)
        return
    kind = family.derivative_kind
    for comp in range(dim):
        for e in exps:
            parts = [Poly.constant(dim, 0.0) for _ in range(dim)]
            parts[comp] = Poly.monomial(dim, e)
            u = VecPoly(parts)
            if kind == "curl":
                yield u, (u.curl2() if dim == 2 else u.curl3())
            elif kind == "div":
                yield u, u.div()
            else:
                raise ValueError(f"{family.name} has no outgoing derivative")


def check_commuting(cx: DiscreteComplex, degree: int = BATTERY_DEGREE) -> np.ndarray:
    """Max relative residual |D Pi_k u - Pi_{k+1} du| per square.

    The battery is every monomial of total degree <= degree placed in
    every value component of the source space; all DOF integrands stay
    within the quadrature design degree, so residuals are pure roundoff
    for a commuting construction.
    """
    residuals = np.zeros(len(cx) - 1)
    for k in range(len(cx) - 1):
        src, dst = cx.spaces[k], cx.spaces[k + 1]
        D = cx.derivatives[k]
        worst = 0.0
        for u, du in _battery(src.family, degree):
            lhs = D @ canonical_projection(src, u)
            rhs = canonical_projection(dst, du)
            worst = max(worst, _absmax(lhs - rhs) / max(1.0, _absmax(rhs)))
        residuals[k] = worst
    return residuals


# -- saddle-point stability ----------------------------------------------------


def compute_infsup(coupling, a_form, mass_v, deflation_tol=DEFLATION_RTOL) -> float:
    """Inf-sup constant of a coupling form against an SPD a-form.

    gamma is the square root of the smallest eigenvalue of

        (B a^-1 B^T) q = lambda M_V q

    restricted to range(B): null directions of B^T (singular values
    below deflation_tol relative) are deflated, so a surjectivity
    failure shows up as a rank drop, not a spurious zero.
    """
    B = as_dense(coupling)
    Mv = check_symmetric(mass_v, "mass_v")
    schur = B @ cholesky_solve(a_form, B.T)
    u, svals, _ = sla.svd(B, check_finite=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0.0
    rank = int(np.count_nonzero(svals > deflation_tol * svals[0]))
    basis = u[:, :rank]
    spec = generalized_symmetric_eig(basis.T @ schur @ basis, basis.T @ Mv @ basis)
    return math.sqrt(max(float(spec.eigenvalues[0]), 0.0))


@dataclass(frozen=True)
class KernelReport:
    """Outcome of the kernel-coercivity condition for a tail pair."""

    passed: bool
    kernel_dim: int
    max_kernel_divergence: float
    gamma1: float

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {"pass": self.passed, "kernel_dim": self.kernel_dim,
                "max_kernel_divergence": self.max_kernel_divergence,
                "gamma1": self.gamma1}


def check_s1(coupling, a_form, mass=None, divdiv=None,
             deflation_tol=DEFLATION_RTOL, div_tol=1e-6) -> KernelReport:
    """Coercivity of the a-form on the kernel of the coupling form.

    Fields weakly orthogonal to the multiplier space must be honestly
    divergence-free: when the div-div Gram matrix is supplied, every
    kernel vector's divergence is measured against the mass norm and
    gamma1 is the smallest Rayleigh quotient of a over mass + divdiv
    (the graph norm) on the kernel.  Without divergence information the
    check degrades to positive definiteness of the a-form on the kernel.
    An empty kernel passes vacuously with gamma1 = inf.

    div_tol allows for the noise floor of measuring a zero quadratic
    form: SVD kernel vectors and the assembled Gram carry O(sqrt(eps)/h)
    relative divergence even for exactly divergence-free pairs, while a
    genuine violation is order one.
    """
    B = as_dense(coupling)
    A = check_symmetric(a_form, "a_form")
    _, svals, vt = sla.svd(B, check_finite=False)
    if svals.size and svals[0] > 0.0:
        rank = int(np.count_nonzero(svals > deflation_tol * svals[0]))
    else:
        rank = 0
    kernel = vt[rank:].T
    kdim = kernel.shape[1]
    if kdim == 0:
        return KernelReport(True, 0, 0.0, math.inf)

    if divdiv is not None:
        # restriction of an all-roundoff divdiv to the kernel is only
        # symmetric up to its own noise floor, so symmetrize by hand
        Mk = _sym(kernel.T @ check_symmetric(mass, "mass") @ kernel)
        Dk = _sym(kernel.T @ as_dense(divdiv) @ kernel)
        div_sq = sla.eigh(Dk, Mk, eigvals_only=True, check_finite=False)[-1]
        max_div = math.sqrt(max(float(div_sq), 0.0))
        Ak = _sym(kernel.T @ A @ kernel)
        gamma1 = float(sla.eigh(Ak, Mk + Dk, eigvals_only=True, check_finite=False)[0])
        return KernelReport(max_div <= div_tol and gamma1 > 0.0, kdim, max_div, gamma1)

    evals = sla.eigvalsh(kernel.T @ A @ kernel, check_finite=False)
    gamma1 = float(evals[0])
    return KernelReport(gamma1 > 0.0, kdim, 0.0, gamma1)
