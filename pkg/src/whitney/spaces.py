"""Global finite element spaces on simplicial meshes.

A DiscreteSpace couples one reference family to one mesh: global DOFs
are numbered entity-block-wise (all vertex DOFs, then edge, face, cell
DOFs, each in entity order), and reference shape functions are pushed
to each cell by the family's Piola map (plain pullback for scalars,
covariant for edge families, contravariant for face families, plain for
discontinuous densities).

Because all entities are stored with ascending vertex indices, the map
from the reference simplex onto each cell's sorted vertex tuple sends
reference tangents/normals to the global entity conventions, and every
degree of freedom is invariant under the pullback.  The local-to-global
sign table is therefore identically +1; it is kept explicit so the
orientation bookkeeping stays visible and testable.

Essential boundary conditions are realized by eliminating DOFs attached
to boundary entities of codimension >= 1 (value trace for scalar
families, tangential trace for edge families, normal trace for face
families; no effect on discontinuous families).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .elements import ElementFamily, get_family, local_derivative_matrix
from .mesh import Mesh
from .quadrature import interval_rule, reference_measure, simplex_rule, triangle_rule


@dataclass
class DiscreteSpace:
    mesh: Mesh
    family: ElementFamily
    bc: str
    ndofs: int
    cell_dofs: np.ndarray      # (num_cells, shape_dim) global dof ids
    cell_signs: np.ndarray     # (num_cells, shape_dim), +1 by construction
    dof_entity: np.ndarray     # (ndofs, 2): entity dim, entity id
    dof_boundary: np.ndarray   # (ndofs,) bool
    free: np.ndarray = field(default=None)  # indices of unconstrained dofs

    @property
    def num_free(self) -> int:
        return self.free.size

    def restrict(self, A):
        """Free-by-free block of an assembled operator."""
        A = A.tocsr() if sp.issparse(A) else np.asarray(A)
        if sp.issparse(A):
            return A[self.free, :][:, self.free]
        return A[np.ix_(self.free, self.free)]

    def restrict_vector(self, v):
        return np.asarray(v)[self.free]

    def extend_vector(self, v_free):
        out = np.zeros(self.ndofs)
        out[self.free] = v_free
        return out

    def local_coefficients(self, u, cell_index):
        return u[self.cell_dofs[cell_index]] * self.cell_signs[cell_index]

    def __repr__(self):
        return (f"<DiscreteSpace {self.family.name} on {self.mesh.domain_tag or 'mesh'}: "
                f"{self.ndofs} dofs, {self.num_free} free>")


def build_space(mesh: Mesh, family, bc: str = "none") -> DiscreteSpace:
    """Number global DOFs for a family over a mesh.

    family may be an ElementFamily or a catalog name.
    """
    if isinstance(family, str):
        family = get_family(family)
    if family.mesh_dim != mesh.dim:
        raise ValueError(f"{family.name} needs a {family.mesh_dim}D mesh, got {mesh.dim}D")
    if bc not in ("none", "essential"):
        raise ValueError(f"unknown boundary condition {bc!r}")

    counts = [family.dofs_per_entity(k) for k in range(mesh.dim + 1)]
    base = np.zeros(mesh.dim + 2, dtype=np.int64)
    for k in range(mesh.dim + 1):
        base[k + 1] = base[k] + counts[k] * mesh.num_entities(k)
    ndofs = int(base[-1])

    layout = family.dof_entity_layout()
    nloc = family.shape_dim
    cell_dofs = np.empty((mesh.num_cells, nloc), dtype=np.int64)
    for (k, local_idx), positions in layout.items():
        ent_ids = mesh.cell_subentities(k)[:, local_idx]
        for slot, pos in enumerate(positions):
            cell_dofs[:, pos] = base[k] + ent_ids * counts[k] + slot

    dof_entity = np.empty((ndofs, 2), dtype=np.int64)
    dof_boundary = np.zeros(ndofs, dtype=bool)
    for k in range(mesh.dim + 1):
        if counts[k] == 0:
            continue
        ids = np.repeat(np.arange(mesh.num_entities(k)), counts[k])
        rows = slice(int(base[k]), int(base[k + 1]))
        dof_entity[rows, 0] = k
        dof_entity[rows, 1] = ids
        if k < mesh.dim:
            dof_boundary[rows] = mesh.boundary[k][ids]

    if bc == "essential":
        free = np.nonzero(~dof_boundary)[0]
    else:
        free = np.arange(ndofs)
    signs = np.ones((mesh.num_cells, nloc), dtype=np.int8)
    return DiscreteSpace(mesh, family, bc, ndofs, cell_dofs, signs, dof_entity, dof_boundary, free)


# -- geometry and tabulation caches -------------------------------------------


class _CellGeometry:
    def __init__(self, mesh: Mesh):
        cells = mesh.cells
        v = mesh.vertices[cells]
        self.origin = v[:, 0, :]
        self.B = np.transpose(v[:, 1:, :] - v[:, :1, :], (0, 2, 1))  # columns v_i - v_0
        self.detB = np.linalg.det(self.B)
        self.Binv = np.linalg.inv(self.B)
        self.absdet = np.abs(self.detB)

    def push_points(self, ref_pts):
        """Reference points to physical points: (nc, nq, dim)."""
        return self.origin[:, None, :] + np.einsum("cij,qj->cqi", self.B, ref_pts)


_GEOMETRY_CACHE: dict[int, _CellGeometry] = {}


def cell_geometry(mesh: Mesh) -> _CellGeometry:
    geo = _GEOMETRY_CACHE.get(id(mesh))
    if geo is None or geo.origin.shape[0] != mesh.num_cells:
        geo = _CellGeometry(mesh)
        _GEOMETRY_CACHE[id(mesh)] = geo
    return geo


def _reference_tab(family: ElementFamily, what: str):
    rule = simplex_rule(family.mesh_dim)
    key = "_tab_" + what
    cached = getattr(family, key, None)
    if cached is None:
        cached = family.tabulate(rule.points) if what == "values" else family.tabulate_derivative(rule.points)
        setattr(family, key, cached)
    return rule, cached


def _physical_values(family, geo, ref_vals):
    """Push reference basis values through the Piola map: (nc, nsh, nq[, d])."""
    nc = geo.B.shape[0]
    if family.value_kind == "scalar":
        return np.broadcast_to(ref_vals, (nc,) + ref_vals.shape)
    if family.mapping == "covariant":
        return np.einsum("sqj,cji->csqi", ref_vals, geo.Binv)
    if family.mapping == "contravariant":
        return np.einsum("sqj,cij->csqi", ref_vals, geo.B) / geo.detB[:, None, None, None]
    raise ValueError(f"no vector value map for {family.mapping}")


def _physical_derivatives(family, geo, ref_ders):
    kind = family.derivative_kind
    nc = geo.B.shape[0]
    if kind == "grad":
        return np.einsum("sqj,cji->csqi", ref_ders, geo.Binv)
    if kind == "curl":
        if family.mesh_dim == 2:
            return ref_ders[None, :, :] / geo.detB[:, None, None]
        return np.einsum("sqj,cij->csqi", ref_ders, geo.B) / geo.detB[:, None, None, None]
    if kind == "div":
        return ref_ders[None, :, :] / geo.detB[:, None, None]
    raise ValueError(f"{family.name} has no derivative")


def _side_tab(space, operator, geo):
    """(tabulated physical side, is_vector) for one side of a bilinear form."""
    fam = space.family
    if operator != "identity" and fam.derivative_kind == operator:
        rule, ref = _reference_tab(fam, "derivative")
        phys = _physical_derivatives(fam, geo, ref)
    else:
        rule, ref = _reference_tab(fam, "values")
        phys = _physical_values(fam, geo, ref)
    return phys, phys.ndim == 4


def _coefficient_samples(coefficient, pts, dim, vector):
    """Coefficient at physical points: scalar (nc, nq) or matrix (nc, nq, d, d)."""
    nc, nq = pts.shape[:2]
    if callable(coefficient):
        flat = pts.reshape(-1, dim)
        vals = np.asarray(coefficient(flat))
        if vals.ndim == 1:
            vals = vals.reshape(nc, nq)
            return (vals[..., None, None] * np.eye(dim)) if vector else vals
        return vals.reshape(nc, nq, dim, dim)
    coefficient = np.asarray(coefficient, dtype=float)
    if coefficient.ndim == 0:
        if vector:
            return np.broadcast_to(float(coefficient) * np.eye(dim), (nc, nq, dim, dim))
        return np.full((nc, nq), float(coefficient))
    if coefficient.shape != (dim, dim):
        raise ValueError("matrix coefficient must be (dim, dim)")
    if not vector:
        raise ValueError("matrix coefficient with scalar-valued integrand")
    return np.broadcast_to(coefficient, (nc, nq, dim, dim))


def assemble_stiffness_like(row_space: DiscreteSpace, col_space: DiscreteSpace,
                            operator: str = "identity", coefficient=1.0) -> sp.csr_matrix:
    """Assemble int (op row basis) . C . (op col basis) dx over all DOFs.

    `operator` is one of identity | grad | curl | div and is applied on
    each side whose family supports it (identity otherwise), which
    covers mass, stiffness, curl-curl, div-div and mixed couplings like
    int v div(tau) with a discontinuous row space.
    """
    if row_space.mesh is not col_space.mesh:
        raise ValueError("row and column spaces live on different meshes")
    if operator not in ("identity", "grad", "curl", "div"):
        raise ValueError(f"unknown operator {operator!r}")
    mesh = row_space.mesh
    geo = cell_geometry(mesh)
    rule = simplex_rule(mesh.dim)
    if operator != "identity" and (row_space.family.derivative_kind != operator
                                   and col_space.family.derivative_kind != operator):
        raise ValueError(f"operator {operator!r} applies to neither family")

    row_tab, row_vec = _side_tab(row_space, operator, geo)
    col_tab, col_vec = _side_tab(col_space, operator, geo)
    if row_vec != col_vec:
        raise ValueError("mixed scalar/vector integrand; operator pairing is inconsistent")

    wdet = rule.weights[None, :] * geo.absdet[:, None]  # (nc, nq)
    if row_vec:
        pts = geo.push_points(rule.points)
        C = _coefficient_samples(coefficient, pts, mesh.dim, True)
        Ccol = np.einsum("cqij,csqj->csqi", C, col_tab)
        local = np.einsum("crqi,csqi,cq->crs", row_tab, Ccol, wdet)
    else:
        pts = geo.push_points(rule.points)
        c = _coefficient_samples(coefficient, pts, mesh.dim, False)
        local = np.einsum("crq,csq,cq->crs", row_tab, col_tab * c[:, None, :], wdet)

    rows = np.repeat(row_space.cell_dofs, col_space.family.shape_dim, axis=1).ravel()
    cols = np.tile(col_space.cell_dofs, (1, row_space.family.shape_dim)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(row_space.ndofs, col_space.ndofs))
    return A.tocsr()


def assemble_mass(space: DiscreteSpace, coefficient=1.0) -> sp.csr_matrix:
    return assemble_stiffness_like(space, space, "identity", coefficient)


def assemble_derivative(space_from: DiscreteSpace, space_to: DiscreteSpace) -> sp.csr_matrix:
    """Global derivative matrix D: DOFs of d(u) from DOFs of u.

    Shared target DOFs receive identical values from every incident
    cell (the image of the derivative is single-valued); this is
    asserted during assembly.
    """
    if space_from.mesh is not space_to.mesh:
        raise ValueError("spaces live on different meshes")
    fam_f, fam_t = space_from.family, space_to.family
    L = local_derivative_matrix(fam_f, fam_t)
    geo = cell_geometry(space_from.mesh)
    into_density = fam_t.mapping == "l2" and fam_f.mapping in ("covariant", "contravariant")
    entries: dict[tuple[int, int], float] = {}
    scale = max(np.abs(L).max(), 1.0)
    for c in range(space_from.mesh.num_cells):
        Lc = L / geo.detB[c] if into_density else L
        gr = space_to.cell_dofs[c]
        gc = space_from.cell_dofs[c]
        for i in range(fam_t.shape_dim):
            for j in range(fam_f.shape_dim):
                v = Lc[i, j]
                key = (int(gr[i]), int(gc[j]))
                old = entries.get(key)
                if old is None:
                    entries[key] = v
                elif abs(old - v) > 1e-9 * scale:
                    raise AssertionError(
                        f"derivative DOF {key} double-valued: {old} vs {v}")
    if entries:
        keys = np.array(list(entries.keys()), dtype=np.int64)
        vals = np.array(list(entries.values()))
        D = sp.coo_matrix((vals, (keys[:, 0], keys[:, 1])),
                          shape=(space_to.ndofs, space_from.ndofs))
    else:
        D = sp.coo_matrix((space_to.ndofs, space_from.ndofs))
    return D.tocsr()


# -- canonical projection ------------------------------------------------------


def _entity_program(family: ElementFamily, k: int):
    layout = family.dof_entity_layout()
    positions = layout.get((k, 0))
    if positions is None:
        return []
    return [family.dofs[p] for p in positions]


def _as_callable(fieldlike):
    return fieldlike.eval if hasattr(fieldlike, "eval") else fieldlike


def canonical_projection(space: DiscreteSpace, fieldlike) -> np.ndarray:
    """DOF vector of the canonical interpolant of a smooth field.

    Vertex/edge/face DOFs are evaluated once per global entity with the
    global orientation conventions; interior DOFs are evaluated per cell
    through the family's pullback.  The result restricted to any cell
    coincides with the reference-element DOFs of the pulled-back field.
    """
    f = _as_callable(fieldlike)
    mesh = space.mesh
    fam = space.family
    out = np.zeros(space.ndofs)
    counts = [fam.dofs_per_entity(k) for k in range(mesh.dim + 1)]
    base = np.cumsum([0] + [counts[k] * mesh.num_entities(k) for k in range(mesh.dim + 1)])

    # vertex values
    prog0 = _entity_program(fam, 0)
    if prog0:
        vals = np.asarray(f(mesh.vertices))
        for slot, dof in enumerate(prog0):
            col = vals if dof.component is None else vals[:, dof.component]
            out[base[0] + slot:base[1]:counts[0]] = col

    # edge moments
    prog1 = _entity_program(fam, 1)
    if prog1:
        rule = interval_rule()
        s = rule.points[:, 0]
        for eid, (a, b) in enumerate(mesh.entities[1].tolist()):
            va, vb = mesh.vertices[a], mesh.vertices[b]
            pts = va[None, :] + s[:, None] * (vb - va)[None, :]
            vals = np.asarray(f(pts))
            for slot, dof in enumerate(prog1):
                wmono = s ** dof.weight[0]
                if dof.kind == "scalar":
                    integrand = vals
                elif dof.kind == "tangential":
                    integrand = vals @ (vb - va)
                elif dof.kind == "normal":
                    integrand = vals @ np.array([vb[1] - va[1], -(vb[0] - va[0])])
                else:
                    raise ValueError(f"bad edge dof kind {dof.kind}")
                out[base[1] + eid * counts[1] + slot] = np.sum(rule.weights * wmono * integrand)

    # 3D face moments
    if mesh.dim == 3:
        prog2 = _entity_program(fam, 2)
        if prog2:
            rule = triangle_rule()
            s, t = rule.points[:, 0], rule.points[:, 1]
            for fid, (ia, ib, ic) in enumerate(mesh.entities[2].tolist()):
                pa, pb, pc = mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]
                pts = pa[None, :] + np.outer(s, pb - pa) + np.outer(t, pc - pa)
                nvec = np.cross(pb - pa, pc - pa)
                vals = np.asarray(f(pts))
                flux = vals @ nvec
                for slot, dof in enumerate(prog2):
                    wmono = s ** dof.weight[0] * t ** dof.weight[1]
                    out[base[2] + fid * counts[2] + slot] = np.sum(rule.weights * wmono * flux)

    # interior moments through the family pullback
    progd = _entity_program(fam, mesh.dim)
    if progd:
        geo = cell_geometry(mesh)
        rule = simplex_rule(mesh.dim)
        pts = geo.push_points(rule.points)
        flat = np.asarray(f(pts.reshape(-1, mesh.dim)))
        if fam.value_kind == "vector":
            vals = flat.reshape(mesh.num_cells, -1, mesh.dim)
            if fam.mapping == "covariant":
                vals = np.einsum("cqi,cij->cqj", vals, geo.B)
            elif fam.mapping == "contravariant":
                vals = np.einsum("cqi,cji->cqj", vals, geo.Binv) * geo.detB[:, None, None]
        else:
            vals = flat.reshape(mesh.num_cells, -1)
        for slot, dof in enumerate(progd):
            wmono = np.ones(rule.points.shape[0])
            for ax, e in enumerate(dof.weight):
                if e:
                    wmono = wmono * rule.points[:, ax] ** e
            comp = vals if dof.component is None else vals[:, :, dof.component]
            moments = comp @ (rule.weights * wmono) / reference_measure(mesh.dim)
            out[base[mesh.dim] + np.arange(mesh.num_cells) * counts[mesh.dim] + slot] = moments
    return out


def evaluate_on_cells(space: DiscreteSpace, u, rule=None):
    """Field values of a DOF vector at quadrature points of every cell.

    Returns (physical points (nc, nq, dim), weights*|det| (nc, nq),
    values (nc, nq) or (nc, nq, dim)).
    """
    mesh = space.mesh
    rule = rule or simplex_rule(mesh.dim)
    geo = cell_geometry(mesh)
    ref = space.family.tabulate(rule.points)
    phys = _physical_values(space.family, geo, ref)
    coef = u[space.cell_dofs] * space.cell_signs
    if phys.ndim == 4:
        vals = np.einsum("cs,csqi->cqi", coef, phys)
    else:
        vals = np.einsum("cs,csq->cq", coef, phys)
    pts = geo.push_points(rule.points)
    wdet = rule.weights[None, :] * geo.absdet[:, None]
    return pts, wdet, vals


def evaluate_derivative_on_cells(space: DiscreteSpace, u, rule=None):
    """Exterior-derivative values of a DOF vector at cell quadrature points.

    Gradient spaces give (nc, nq, dim), 2D curl and div give (nc, nq),
    3D curl gives (nc, nq, 3).  Same return layout as evaluate_on_cells.
    """
    mesh = space.mesh
    fam = space.family
    if fam.derivative_kind is None:
        raise ValueError(f"{fam.name} has no derivative")
    rule = rule or simplex_rule(mesh.dim)
    geo = cell_geometry(mesh)
    ref = fam.tabulate_derivative(rule.points)
    phys = _physical_derivatives(fam, geo, ref)
    coef = u[space.cell_dofs] * space.cell_signs
    if phys.ndim == 4:
        vals = np.einsum("cs,csqi->cqi", coef, phys)
    else:
        vals = np.einsum("cs,csq->cq", coef, phys)
    pts = geo.push_points(rule.points)
    wdet = rule.weights[None, :] * geo.absdet[:, None]
    return pts, wdet, vals


def assemble_load(space: DiscreteSpace, f) -> np.ndarray:
    """Load vector int f . phi_i dx against every global basis function.

    `f` maps (N, dim) points to (N,) scalars or (N, dim) vectors to
    match the family's value kind.
    """
    mesh = space.mesh
    geo = cell_geometry(mesh)
    rule, ref = _reference_tab(space.family, "values")
    phys = _physical_values(space.family, geo, ref)
    pts = geo.push_points(rule.points)
    fv = np.asarray(_as_callable(f)(pts.reshape(-1, mesh.dim)))
    wdet = rule.weights[None, :] * geo.absdet[:, None]
    if phys.ndim == 4:
        fv = fv.reshape(mesh.num_cells, -1, mesh.dim)
        local = np.einsum("csqi,cqi,cq->cs", phys, fv, wdet)
    else:
        fv = fv.reshape(mesh.num_cells, -1)
        local = np.einsum("csq,cq,cq->cs", phys, fv, wdet)
    out = np.zeros(space.ndofs)
    np.add.at(out, space.cell_dofs, local * space.cell_signs)
    return out


def assemble_component_products(space: DiscreteSpace, a: int, b: int) -> sp.csr_matrix:
    """int d_a(phi_i) d_b(phi_j) dx for a scalar H1 space.

    Building block for Cartesian-product vector fields (the nodal
    Maxwell discretization couples gradient components this way).
    """
    if space.family.mapping != "h1":
        raise ValueError("component products need a scalar H1 family")
    mesh = space.mesh
    geo = cell_geometry(mesh)
    rule, ref = _reference_tab(space.family, "derivative")
    grads = _physical_derivatives(space.family, geo, ref)
    wdet = rule.weights[None, :] * geo.absdet[:, None]
    local = np.einsum("crq,csq,cq->crs", grads[..., a], grads[..., b], wdet)
    n = space.family.shape_dim
    rows = np.repeat(space.cell_dofs, n, axis=1).ravel()
    cols = np.tile(space.cell_dofs, (1, n)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(space.ndofs, space.ndofs)).tocsr()
