"""Lowest-order conforming mixed elasticity on triangles.

The stress element is the 24-DOF symmetric-matrix triangle whose shape
space is S_T = {tau in P3(T, S) : div tau in P1(T, R^2)}: all quadratic
symmetric fields plus the divergence-reduced cubics (30 coefficients
minus 6 independent constraints).  Displacements are discontinuous
piecewise linear vector fields.

The stress element is not generated from a reference cell by a Piola
map (its DOF set is not affine-equivariant); each cell carries its own
nodal basis, built in centered, diameter-scaled coordinates for
conditioning.  DOFs are defined by global conventions so that shared
entities induce shared functionals:

* 9 vertex values: the components (s11, s12, s22) at each vertex,
* 12 edge moments: int_e (tau n)_c s^j ds for Cartesian components
  c in {x, y} and degrees j in {0, 1}, with s the arclength parameter
  ascending from the lower-indexed endpoint and n the unnormalized
  clockwise rotation of the edge vector,
* 3 interior means: (1/|T|) int_T tau_c dx per component.

Edge moments plus endpoint values pin all four coefficients of each
cubic component of tau n along an edge, so the assembled fields are
H(div, S)-conforming with single-valued vertex stresses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .elements import get_family
from .linalg import numerical_rank, symmetric_indefinite_solve
from .mesh import Mesh
from .poly import Poly, SymPoly, monomial_exponents
from .quadrature import interval_rule, triangle_rule

P3 = monomial_exponents(2, 3)           # 10 monomials per component
P2 = monomial_exponents(2, 2)           # 6 monomials of a divergence
NCOEF = 3 * len(P3)                     # 30 coefficients of P3(T, S)
NDOF = 24
DEGENERACY_TOL = 1e-10                  # area >= tol * diameter^2

# local DOF order: 9 vertex values (vertex-major, components s11 s12 s22),
# then 12 edge moments (lexicographic local edges, slot = component*2 +
# degree), then 3 interior means
_EDGE_LOCAL = ((0, 1), (0, 2), (1, 2))
# rows of tau as index pairs into (s11, s12, s22)
_ROWS = ((0, 1), (1, 2))


def _monomial_values(points: np.ndarray, exponents) -> np.ndarray:
    """(len(exponents), npoints) table of monomial values."""
    x, y = points[:, 0], points[:, 1]
    return np.stack([x ** a * y ** b for a, b in exponents])


@lru_cache(maxsize=1)
def _divergence_operator() -> np.ndarray:
    """(12, 30) map from P3(T,S) coefficients to div coefficients on P2.

    Row layout: component-major over P2 monomials; column layout:
    component blocks (s11, s12, s22) over P3 monomials.
    """
    index2 = {e: i for i, e in enumerate(P2)}
    D = np.zeros((2 * len(P2), NCOEF))
    for block in range(3):
        for j, e in enumerate(P3):
            col = block * len(P3) + j
            for comp in range(2):
                if block not in _ROWS[comp]:
                    continue
                axis = _ROWS[comp].index(block)
                if e[axis] == 0:
                    continue
                lower = list(e)
                lower[axis] -= 1
                D[comp * len(P2) + index2[tuple(lower)], col] += e[axis]
    return D


@lru_cache(maxsize=1)
def _shape_null_space() -> np.ndarray:
    """(24, 30) orthonormal coefficient basis of the constrained space.

    The constraint kills the strictly quadratic part of the divergence:
    6 rows of the divergence operator, independent by construction.
    """
    strict = [i for i, e in enumerate(P2) if sum(e) == 2]
    rows = np.concatenate([np.asarray(strict), len(P2) + np.asarray(strict)])
    C = _divergence_operator()[rows]
    u, svals, vt = sla.svd(C)
    rank = int(np.count_nonzero(svals > 1e-12 * svals[0]))
    if rank != 6:
        raise RuntimeError(f"divergence constraint rank {rank}, expected 6")
    return vt[rank:]


def constraint_matrix() -> np.ndarray:
    """The (6, 30) map from coefficients to the quadratic part of div."""
    strict = [i for i, e in enumerate(P2) if sum(e) == 2]
    rows = np.concatenate([np.asarray(strict), len(P2) + np.asarray(strict)])
    return _divergence_operator()[rows].copy()


def _coeffs_to_sympoly(coeffs: np.ndarray) -> SymPoly:
    comps = []
    for block in range(3):
        terms = {e: c for e, c in zip(P3, coeffs[block * len(P3):(block + 1) * len(P3)])}
        comps.append(Poly(2, terms))
    return SymPoly(*comps)


def aw_shape_space(vertices) -> list[SymPoly]:
    """Orthonormal basis of S_T in centered, scaled local coordinates."""
    _validate_triangle(np.asarray(vertices, dtype=float))
    return [_coeffs_to_sympoly(row) for row in _shape_null_space()]


def _validate_triangle(vertices: np.ndarray):
    if vertices.shape != (3, 2):
        raise ValueError(f"triangle needs 3 plane vertices, got {vertices.shape}")
    e1, e2 = vertices[1] - vertices[0], vertices[2] - vertices[0]
    area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    diam = max(np.linalg.norm(vertices[i] - vertices[j])
               for i, j in ((0, 1), (0, 2), (1, 2)))
    if area < DEGENERACY_TOL * diam ** 2:
        raise ValueError("degenerate triangle")
    return area, diam


def _dof_matrix_on_monomials(vertices: np.ndarray, origin, scale) -> np.ndarray:
    """(24, 30) table: each DOF applied to each single-monomial field."""
    nmono = len(P3)
    W = np.zeros((NDOF, NCOEF))
    local = (vertices - origin) / scale

    vmono = _monomial_values(local, P3)             # (10, 3)
    for v in range(3):
        for comp in range(3):
            W[v * 3 + comp, comp * nmono:(comp + 1) * nmono] = vmono[:, v]

    erule = interval_rule()
    s = erule.points[:, 0]
    smom = np.stack([erule.weights, erule.weights * s])        # (2, nq)
    for le, (a, b) in enumerate(_EDGE_LOCAL):
        pa, pb = vertices[a], vertices[b]
        t = pb - pa
        n = np.array([t[1], -t[0]])
        pts = (pa[None, :] + s[:, None] * t[None, :] - origin) / scale
        mono = _monomial_values(pts, P3)                        # (10, nq)
        moments = smom @ mono.T                                 # (2, 10)
        for comp in range(2):
            r1, r2 = _ROWS[comp]
            for deg in range(2):
                row = 9 + le * 4 + comp * 2 + deg
                W[row, r1 * nmono:(r1 + 1) * nmono] = n[0] * moments[deg]
                W[row, r2 * nmono:(r2 + 1) * nmono] = n[1] * moments[deg]

    trule = triangle_rule()
    B = np.column_stack([vertices[1] - vertices[0], vertices[2] - vertices[0]])
    phys = vertices[0][None, :] + trule.points @ B.T
    mono = _monomial_values((phys - origin) / scale, P3)
    means = 2.0 * (mono @ trule.weights)            # weights sum to 1/2
    for comp in range(3):
        W[21 + comp, comp * nmono:(comp + 1) * nmono] = means
    return W


@dataclass
class AWCell:
    """Nodal stress basis of one triangle in its scaled local frame."""

    vertices: np.ndarray
    origin: np.ndarray
    scale: float
    area: float
    coeffs: np.ndarray        # (24, 30) nodal coefficients, scaled coords
    cond: float

    def local_points(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.origin) / self.scale

    def tabulate(self, points: np.ndarray) -> np.ndarray:
        """(24, npoints, 3) stress components at physical points."""
        mono = _monomial_values(self.local_points(points), P3)
        vals = self.coeffs.reshape(NDOF, 3, len(P3)) @ mono
        return np.transpose(vals, (0, 2, 1))

    def tabulate_div(self, points: np.ndarray) -> np.ndarray:
        """(24, npoints, 2) physical divergence at physical points."""
        dcoef = self.coeffs @ _divergence_operator().T / self.scale
        mono = _monomial_values(self.local_points(points), P2)
        vals = dcoef.reshape(NDOF, 2, len(P2)) @ mono
        return np.transpose(vals, (0, 2, 1))

    def nodal_fields(self) -> list[SymPoly]:
        return [_coeffs_to_sympoly(row) for row in self.coeffs]


def aw_nodal_basis(vertices) -> AWCell:
    """Dualize the shape basis against the 24 DOFs of one triangle."""
    vertices = np.asarray(vertices, dtype=float)
    area, diam = _validate_triangle(vertices)
    origin = vertices.mean(axis=0)
    scale = diam
    W = _dof_matrix_on_monomials(vertices, origin, scale)
    null = _shape_null_space()
    V = W @ null.T                                   # dofs x shape basis
    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > 1e12:
        raise RuntimeError(f"stress element dualization ill-conditioned: {cond:.2e}")
    # nodal_j = sum_i X[i, j] shape_i with V X = I, so rows of X^T null
    coeffs = sla.solve(V.T, null, check_finite=False)
    return AWCell(vertices, origin, scale, area, coeffs, cond)


@dataclass(frozen=True)
class UnisolvenceReport:
    rank: int
    cond: float
    passed: bool

    def to_dict(self):
        return {"rank": self.rank, "cond": self.cond, "pass": self.passed}


def aw_unisolvence_check(vertices) -> UnisolvenceReport:
    """Rank and conditioning of the DOF matrix on the shape basis."""
    vertices = np.asarray(vertices, dtype=float)
    _validate_triangle(vertices)
    origin = vertices.mean(axis=0)
    diam = max(np.linalg.norm(vertices[i] - vertices[j])
               for i, j in ((0, 1), (0, 2), (1, 2)))
    W = _dof_matrix_on_monomials(vertices, origin, diam)
    V = W @ _shape_null_space().T
    rank = numerical_rank(V)
    return UnisolvenceReport(rank, float(np.linalg.cond(V)), rank == NDOF)


# -- global spaces ---------------------------------------------------------


@dataclass
class StressSpace:
    """Global H(div, S) stress space: 3 DOFs/vertex + 4/edge + 3/cell."""

    mesh: Mesh
    ndofs: int
    cell_dofs: np.ndarray          # (num_cells, 24)
    cells: list

    @property
    def num_cells(self):
        return self.mesh.num_cells


def build_stress_space(mesh: Mesh) -> StressSpace:
    if mesh.dim != 2:
        raise ValueError("stress elements are two-dimensional")
    nv, ne, nt = mesh.num_vertices, mesh.num_entities(1), mesh.num_cells
    ndofs = 3 * nv + 4 * ne + 3 * nt
    edge_base, cell_base = 3 * nv, 3 * nv + 4 * ne

    cell_edges = mesh.cell_subentities(1)
    cell_dofs = np.empty((nt, NDOF), dtype=np.int64)
    cells = []
    for c in range(nt):
        verts = mesh.cells[c]
        for lv in range(3):
            for comp in range(3):
                cell_dofs[c, lv * 3 + comp] = verts[lv] * 3 + comp
        for le in range(3):
            ge = cell_edges[c, le]
            for slot in range(4):
                cell_dofs[c, 9 + le * 4 + slot] = edge_base + ge * 4 + slot
        for comp in range(3):
            cell_dofs[c, 21 + comp] = cell_base + c * 3 + comp
        cells.append(aw_nodal_basis(mesh.vertices[verts]))
    return StressSpace(mesh, ndofs, cell_dofs, cells)


@dataclass
class DisplacementSpace:
    """Discontinuous P1 vectors: 6 moment DOFs per cell.

    DOF (cell, comp, slot) -> cell*6 + comp*3 + slot, where slot runs
    over the scalar dg1 interior moments (weights 1, x, y in reference
    coordinates, normalized by cell measure).
    """

    mesh: Mesh
    ndofs: int

    @property
    def num_cells(self):
        return self.mesh.num_cells


def build_displacement_space(mesh: Mesh) -> DisplacementSpace:
    if mesh.dim != 2:
        raise ValueError("displacement space is two-dimensional")
    return DisplacementSpace(mesh, 6 * mesh.num_cells)


@lru_cache(maxsize=1)
def _dg1_reference():
    """Reference tabulations of the scalar dg1 nodal basis.

    mono holds the family's own moment weights at the rule points, in
    DOF order (the exponent enumeration is the family's, not ours).
    """
    fam = get_family("dg1")
    rule = triangle_rule()
    tab = fam.tabulate(rule.points)              # (3, nq)
    mono = np.stack([np.prod(rule.points ** np.asarray(d.weight, dtype=float), axis=1)
                     for d in fam.dofs])
    return fam, rule, tab, mono


def _cell_geometry_arrays(mesh: Mesh):
    v = mesh.vertices[mesh.cells]
    B = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
    detB = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    return v, B, detB


def displacement_mass(space: DisplacementSpace) -> sp.csr_matrix:
    """Block-diagonal L2 Gram of the per-cell nodal P1 vector basis."""
    _, rule, tab, _ = _dg1_reference()
    _, _, detB = _cell_geometry_arrays(space.mesh)
    local = np.einsum("iq,jq,q->ij", tab, tab, rule.weights)   # (3, 3)
    blocks = np.abs(detB)[:, None, None] * local[None, :, :]
    comp_block = np.zeros((space.num_cells, 6, 6))
    comp_block[:, :3, :3] = blocks
    comp_block[:, 3:, 3:] = blocks
    return sp.block_diag(comp_block, format="csr")


def displacement_projection(space: DisplacementSpace, f) -> np.ndarray:
    """Moment DOFs of a smooth vector field (its cellwise P1 projection)."""
    _, rule, _, mono = _dg1_reference()
    mesh = space.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    vals = np.asarray(f(pts.reshape(-1, 2))).reshape(mesh.num_cells, -1, 2)
    # (1/|T|) int f_c m dx = 2 sum_q w_q f_c(x_q) m(x_q)
    moments = 2.0 * np.einsum("cqi,sq,q->cis", vals, mono, rule.weights)
    return moments.reshape(-1)


def evaluate_displacement(space: DisplacementSpace, u: np.ndarray, rule=None):
    """(points, weights*|det|, values (nc, nq, 2)) of a DOF vector."""
    fam, default_rule, _, _ = _dg1_reference()
    rule = rule or default_rule
    tab = fam.tabulate(rule.points)
    mesh = space.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    coef = u.reshape(mesh.num_cells, 2, 3)
    vals = np.einsum("cis,sq->cqi", coef, tab)
    wdet = rule.weights[None, :] * np.abs(detB)[:, None]
    return pts, wdet, vals


def evaluate_stress(space: StressSpace, sigma: np.ndarray, rule=None):
    """(points, weights*|det|, values (nc, nq, 3)) of a stress DOF vector."""
    rule = rule or triangle_rule()
    mesh = space.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    nq = rule.points.shape[0]
    vals = np.empty((mesh.num_cells, nq, 3))
    for c, cell in enumerate(space.cells):
        tab = cell.tabulate(pts[c])                     # (24, nq, 3)
        vals[c] = np.einsum("s,sqi->qi", sigma[space.cell_dofs[c]], tab)
    wdet = rule.weights[None, :] * np.abs(detB)[:, None]
    return pts, wdet, vals


# -- global operators -------------------------------------------------------


def compliance_coefficients(lam: float, mu: float) -> tuple[float, float]:
    """(a1, a2) with C^-1 sigma = a1 (sigma - a2 tr(sigma) I) in 2D."""
    if mu <= 0.0 or lam < 0.0:
        raise ValueError("need mu > 0 and lam >= 0")
    return 1.0 / (2.0 * mu), lam / (2.0 * mu + 2.0 * lam)


def assemble_compliance(space: StressSpace, lam: float = 1.0, mu: float = 1.0) -> sp.csr_matrix:
    """Global int C^-1 sigma : tau with constant isotropic moduli."""
    a1, a2 = compliance_coefficients(lam, mu)
    rule = triangle_rule()
    mesh = space.mesh
    _, _, detB = _cell_geometry_arrays(mesh)
    v, B, _ = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    # sigma : tau = s11 t11 + 2 s12 t12 + s22 t22
    metric = np.array([1.0, 2.0, 1.0])
    rows, cols, vals = [], [], []
    for c, cell in enumerate(space.cells):
        tab = cell.tabulate(pts[c])                       # (24, nq, 3)
        w = rule.weights * abs(detB[c])
        contract = np.einsum("sqi,tqi,i,q->st", tab, tab, metric, w)
        trace = tab[:, :, 0] + tab[:, :, 2]
        tr_part = np.einsum("sq,tq,q->st", trace, trace, w)
        local = a1 * (contract - a2 * tr_part)
        dofs = space.cell_dofs[c]
        rows.append(np.repeat(dofs, NDOF))
        cols.append(np.tile(dofs, NDOF))
        vals.append(local.reshape(-1))
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(space.ndofs, space.ndofs))
    return A.tocsr()


def assemble_divergence(space: StressSpace, disp: DisplacementSpace) -> sp.csr_matrix:
    """DOF matrix of div: (div sigma)'s displacement DOFs = D sigma."""
    _, rule, _, mono = _dg1_reference()
    mesh = space.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    rows, cols, vals = [], [], []
    for c, cell in enumerate(space.cells):
        dtab = cell.tabulate_div(pts[c])                  # (24, nq, 2)
        local = 2.0 * np.einsum("sqi,mq,q->ims", dtab, mono, rule.weights)
        base = 6 * c
        rows.append(np.repeat(np.arange(base, base + 6), NDOF))
        cols.append(np.tile(space.cell_dofs[c], 6))
        vals.append(local.reshape(-1))
    D = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(disp.ndofs, space.ndofs))
    return D.tocsr()


def assemble_coupling(space: StressSpace, disp: DisplacementSpace) -> sp.csr_matrix:
    """b(sigma, v) = int div sigma . v, rows over displacement DOFs."""
    fam, rule, tab, _ = _dg1_reference()
    mesh = space.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    rows, cols, vals = [], [], []
    for c, cell in enumerate(space.cells):
        dtab = cell.tabulate_div(pts[c])                  # (24, nq, 2)
        w = rule.weights * abs(detB[c])
        local = np.einsum("sqi,mq,q->ims", dtab, tab, w)  # (2, 3, 24)
        base = 6 * c
        rows.append(np.repeat(np.arange(base, base + 6), NDOF))
        cols.append(np.tile(space.cell_dofs[c], 6))
        vals.append(local.reshape(-1))
    Bm = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(disp.ndofs, space.ndofs))
    return Bm.tocsr()


def load_vector(disp: DisplacementSpace, f) -> np.ndarray:
    """int f . v_k over the displacement nodal basis."""
    fam, rule, tab, _ = _dg1_reference()
    mesh = disp.mesh
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + rule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    vals = np.asarray(f(pts.reshape(-1, 2))).reshape(mesh.num_cells, -1, 2)
    wdet = rule.weights[None, :] * np.abs(detB)[:, None]
    out = np.einsum("cqi,mq,cq->cim", vals, tab, wdet)
    return out.reshape(-1)


def interpolate_stress(space: StressSpace, field) -> np.ndarray:
    """Canonical stress interpolant of a smooth field.

    field maps (N, 2) points to (N, 3) components (s11, s12, s22).
    Shared DOFs are evaluated once per global entity.
    """
    mesh = space.mesh
    out = np.zeros(space.ndofs)
    vals = np.asarray(field(mesh.vertices))
    out[:3 * mesh.num_vertices] = vals.reshape(-1)

    erule = interval_rule()
    s = erule.points[:, 0]
    smom = np.stack([erule.weights, erule.weights * s])
    edge_base = 3 * mesh.num_vertices
    for eid, (a, b) in enumerate(mesh.entities[1].tolist()):
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        t = pb - pa
        n = np.array([t[1], -t[0]])
        pts = pa[None, :] + s[:, None] * t[None, :]
        comp = np.asarray(field(pts))                     # (nq, 3)
        for cidx in range(2):
            r1, r2 = _ROWS[cidx]
            traction = comp[:, r1] * n[0] + comp[:, r2] * n[1]
            for deg in range(2):
                out[edge_base + eid * 4 + cidx * 2 + deg] = smom[deg] @ traction

    trule = triangle_rule()
    v, B, detB = _cell_geometry_arrays(mesh)
    pts = v[:, 0][:, None, :] + trule.points[None, :, :] @ np.swapaxes(B, 1, 2)
    vals = np.asarray(field(pts.reshape(-1, 2))).reshape(mesh.num_cells, -1, 3)
    means = 2.0 * np.einsum("cqi,q->ci", vals, trule.weights)
    cell_base = 3 * mesh.num_vertices + 4 * mesh.num_entities(1)
    out[cell_base:] = means.reshape(-1)
    return out


def commutativity_residual(mesh: Mesh, degree: int = 3) -> float:
    """max over symmetric monomial fields of |D Pi_S(tau) - Pi_V(div tau)|.

    Relative to the projected divergence; the battery places every
    monomial of total degree <= degree in each component slot.
    """
    stress = build_stress_space(mesh)
    disp = build_displacement_space(mesh)
    D = assemble_divergence(stress, disp)
    zero = Poly.constant(2, 0.0)
    worst = 0.0
    for block in range(3):
        for e in monomial_exponents(2, degree):
            comps = [zero, zero, zero]
            comps[block] = Poly.monomial(2, e)
            tau = SymPoly(*comps)
            div = tau.div()
            lhs = D @ interpolate_stress(stress, tau.eval)
            rhs = displacement_projection(disp, div.eval)
            scale = max(1.0, np.abs(rhs).max())
            worst = max(worst, np.abs(lhs - rhs).max() / scale)
    return worst


# -- mixed solver ------------------------------------------------------------


@dataclass
class ElasticitySolution:
    stress_space: StressSpace
    displacement_space: DisplacementSpace
    sigma: np.ndarray
    u: np.ndarray
    equilibrium_residual: float


def solve_mixed_elasticity(mesh: Mesh, lam: float = 1.0, mu: float = 1.0,
                           f=None) -> ElasticitySolution:
    """Saddle-point solve of the stress-displacement system.

    Finds (sigma, u) with int C^-1 sigma : tau + int u . div tau = 0 and
    int div sigma . v = -int f . v for all (tau, v): the classical
    equilibrium -div sigma = f, with u = 0 on the boundary encoded
    weakly by the first equation.  The reported equilibrium residual is
    max |D sigma + Pi_V f| over the displacement DOFs, which the
    discrete equations satisfy up to solver roundoff.
    """
    if f is None:
        raise ValueError("need a load f(points) -> (N, 2)")
    stress = build_stress_space(mesh)
    disp = build_displacement_space(mesh)
    A = assemble_compliance(stress, lam, mu)
    Bm = assemble_coupling(stress, disp)
    F = load_vector(disp, f)
    K = sp.bmat([[A, Bm.T], [Bm, None]], format="csr")
    rhs = np.concatenate([np.zeros(stress.ndofs), -F])
    x = symmetric_indefinite_solve(K, rhs)
    sigma, u = x[:stress.ndofs], x[stress.ndofs:]
    D = assemble_divergence(stress, disp)
    target = displacement_projection(disp, f)
    resid = np.abs(D @ sigma + target).max() / max(1.0, np.abs(target).max())
    return ElasticitySolution(stress, disp, sigma, u, float(resid))


def manufactured_solution(lam: float = 1.0, mu: float = 1.0):
    """(u, sigma, f) callables for u = (sin(pi x) sin(pi y), 0).

    sigma = 2 mu eps(u) + lam tr(eps) I and f = -div sigma; u vanishes
    on the boundary of the unit square, matching the weak Dirichlet
    condition of the mixed form.
    """
    def u(points):
        x, y = points[:, 0], points[:, 1]
        return np.stack([np.sin(np.pi * x) * np.sin(np.pi * y),
                         np.zeros_like(x)], axis=-1)

    def sigma(points):
        x, y = points[:, 0], points[:, 1]
        e11 = np.pi * np.cos(np.pi * x) * np.sin(np.pi * y)
        e12 = 0.5 * np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)
        s11 = (2.0 * mu + lam) * e11
        s12 = 2.0 * mu * e12
        s22 = lam * e11
        return np.stack([s11, s12, s22], axis=-1)

    def f(points):
        x, y = points[:, 0], points[:, 1]
        ss = np.sin(np.pi * x) * np.sin(np.pi * y)
        cc = np.cos(np.pi * x) * np.cos(np.pi * y)
        return np.stack([(3.0 * mu + lam) * np.pi ** 2 * ss,
                         -(mu + lam) * np.pi ** 2 * cc], axis=-1)

    return u, sigma, f


def dimension_bookkeeping(mesh: Mesh) -> dict:
    """Euler-style count for the discrete elasticity sequence.

    The head space is counted but never built: 6 DOFs per vertex plus 1
    per edge (values, first and second derivatives at vertices; edge
    normal-derivative means).  On a disk the alternating sum equals 3,
    the dimension of the resolved P1 kernel.
    """
    nv, ne, nt = mesh.num_vertices, mesh.num_entities(1), mesh.num_cells
    head = 6 * nv + ne
    stress = 3 * nv + 4 * ne + 3 * nt
    disp = 6 * nt
    return {"head": head, "stress": stress, "displacement": disp,
            "alternating_sum": head - stress + disp}
