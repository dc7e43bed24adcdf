"""Reference element catalog.

Four families on the unit simplex, all constructed the same way: a
polynomial shape space given by an explicit spanning set, a list of
degrees of freedom (point values and entity moments), and the nodal
basis dual to those degrees of freedom obtained by inverting the
DOF-by-span Vandermonde matrix.

2D families: lagrange1..3 (scalar, C0), dg0..2 (scalar, discontinuous),
edge1..2 (vector, tangentially continuous; order 1 span a + b(-y, x)),
face1..2 (vector, normally continuous; order 1 span a + b x).  The edge
family is the 90-degree rotation of the face family.

3D families (suffix _3d): lagrange1_3d, dg0_3d, edge1_3d (span a + b
cross x), face1_3d (span a + b x).

Conventions: tangents run from the lower to the higher local vertex
index; 2D edge normals are the tangent rotated by -90 degrees, i.e.
n = (t2, -t1); 3D face normals follow the right-hand rule on the
ascending vertex tuple.  Tangential and normal moments are line/flux
integrals weighted by powers of the arc parameter s in [0, 1]; scalar
edge moments and interior moments are normalized by the entity measure.
With these choices every functional is invariant under the family's
affine pullback (plain for scalars, covariant for edge, contravariant
for face, plain for discontinuous), so a mesh stored in ascending vertex
order needs no orientation corrections during assembly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .poly import Poly, VecPoly, grad, monomial_exponents
from .quadrature import interval_rule, reference_measure, simplex_rule, triangle_rule


class UnknownFamilyError(KeyError):
    pass


class IncompatibleFamiliesError(ValueError):
    pass


def reference_vertices(dim: int) -> np.ndarray:
    verts = np.zeros((dim + 1, dim))
    for i in range(dim):
        verts[i + 1, i] = 1.0
    return verts


def local_entities(dim: int, k: int) -> list[tuple[int, ...]]:
    """Sub-simplices of the reference simplex as ascending local vertex
    tuples, enumerated lexicographically (matches mesh tables)."""
    return list(itertools.combinations(range(dim + 1), k + 1))


@dataclass(frozen=True)
class DofSpec:
    """One degree of freedom of a reference element.

    kind:
      "value"      point evaluation at a vertex (component for vectors)
      "scalar"     moment of a scalar on an edge against s^j (normalized)
      "tangential" edge moment of q . t against s^j (line integral)
      "normal"     edge/face moment of q . n against parameter monomial
                   (flux integral)
      "interior"   cell moment against a reference monomial, normalized
                   by the cell measure (component selects for vectors)
    """

    entity_dim: int
    entity_index: int
    kind: str
    weight: tuple[int, ...] = ()
    component: int | None = None


def _rot_cw(v):
    """Clockwise rotation (v2, -v1); maps tangent to our edge normal."""
    return np.array([v[1], -v[0]])


def evaluate_dof(dof: DofSpec, f, dim: int) -> float:
    """Apply one reference DOF to a field given as callable on points."""
    verts = reference_vertices(dim)
    if dof.kind == "value":
        x = verts[local_entities(dim, 0)[dof.entity_index][0]]
        val = np.asarray(f(x[None, :]))
        return float(val[0] if dof.component is None else val[0, dof.component])

    if dof.entity_dim == 1:
        a, b = local_entities(dim, 1)[dof.entity_index]
        va, vb = verts[a], verts[b]
        rule = interval_rule()
        s = rule.points[:, 0]
        pts = va[None, :] + s[:, None] * (vb - va)[None, :]
        vals = np.asarray(f(pts))
        wmono = s ** dof.weight[0]
        if dof.kind == "scalar":
            integrand = vals
        elif dof.kind == "tangential":
            integrand = vals @ (vb - va)
        elif dof.kind == "normal":
            integrand = vals @ _rot_cw(vb - va)
        else:
            raise ValueError(f"bad dof kind {dof.kind} on an edge")
        return float(np.sum(rule.weights * wmono * integrand))

    if dof.entity_dim == 2 and dof.kind == "normal":
        ia, ib, ic = local_entities(dim, 2)[dof.entity_index]
        pa, pb, pc = verts[ia], verts[ib], verts[ic]
        rule = triangle_rule()
        s, t = rule.points[:, 0], rule.points[:, 1]
        pts = pa[None, :] + np.outer(s, pb - pa) + np.outer(t, pc - pa)
        nvec = np.cross(pb - pa, pc - pa)
        vals = np.asarray(f(pts))
        wmono = s ** dof.weight[0] * t ** dof.weight[1]
        return float(np.sum(rule.weights * wmono * (vals @ nvec)))

    if dof.kind == "interior":
        rule = simplex_rule(dim)
        vals = np.asarray(f(rule.points))
        if dof.component is not None:
            vals = vals[:, dof.component]
        wmono = np.ones(rule.points.shape[0])
        for ax, e in enumerate(dof.weight):
            if e:
                wmono = wmono * rule.points[:, ax] ** e
        return float(np.sum(rule.weights * wmono * vals) / reference_measure(dim))

    raise ValueError(f"unsupported dof {dof}")


class ElementFamily:
    """A reference element: shape space, DOFs and the dual nodal basis."""

    def __init__(self, name, mesh_dim, form_degree, order, mapping, span, dofs):
        self.name = name
        self.mesh_dim = mesh_dim
        self.form_degree = form_degree
        self.order = order
        self.mapping = mapping  # h1 | covariant | contravariant | l2
        self.span = tuple(span)
        self.dofs = tuple(dofs)
        if len(self.span) != len(self.dofs):
            raise ValueError(f"{name}: {len(span)} span functions vs {len(dofs)} dofs")
        self._nodal = None
        self._deriv = None

    # -- basic facts ---------------------------------------------------------

    @property
    def shape_dim(self) -> int:
        return len(self.dofs)

    @property
    def value_kind(self) -> str:
        return "vector" if isinstance(self.span[0], VecPoly) else "scalar"

    @property
    def derivative_kind(self) -> str | None:
        return {
            "h1": "grad",
            "covariant": "curl",
            "contravariant": "div",
            "l2": None,
        }[self.mapping]

    def dofs_per_entity(self, k: int) -> int:
        counts = {}
        for d in self.dofs:
            counts[(d.entity_dim, d.entity_index)] = counts.get((d.entity_dim, d.entity_index), 0) + 1
        per = {c for (ek, _), c in counts.items() if ek == k}
        if not per:
            return 0
        assert len(per) == 1, f"{self.name}: uneven dof count on dim-{k} entities"
        return per.pop()

    def dof_entity_layout(self):
        """Mapping (entity_dim, local_index) -> tuple of dof positions."""
        layout: dict[tuple[int, int], list[int]] = {}
        for i, d in enumerate(self.dofs):
            layout.setdefault((d.entity_dim, d.entity_index), []).append(i)
        return {k: tuple(v) for k, v in layout.items()}

    # -- nodal basis -----------------------------------------------------------

    def _field_eval(self, p):
        return p.eval

    @property
    def nodal_basis(self):
        """Shape functions dual to the DOFs (delta property)."""
        if self._nodal is None:
            n = self.shape_dim
            V = np.empty((n, n))
            for j, p in enumerate(self.span):
                ev = self._field_eval(p)
                for i, dof in enumerate(self.dofs):
                    V[i, j] = evaluate_dof(dof, ev, self.mesh_dim)
            cond = np.linalg.cond(V)
            if not np.isfinite(cond) or cond > 1e12:
                raise ValueError(f"{self.name}: degrees of freedom not unisolvent (cond {cond:.2e})")
            C = np.linalg.inv(V)
            nodal = []
            for j in range(n):
                acc = self.span[0] * float(C[0, j])
                for i in range(1, n):
                    if C[i, j] != 0.0:
                        acc = acc + self.span[i] * float(C[i, j])
                nodal.append(acc)
            self._nodal = nodal
        return self._nodal

    @property
    def nodal_derivatives(self):
        """Exterior derivative of each nodal shape function.

        grad for h1, scalar curl (2D) / curl (3D) for covariant, div for
        contravariant; None for discontinuous families.
        """
        if self.derivative_kind is None:
            return None
        if self._deriv is None:
            kind = self.derivative_kind
            out = []
            for p in self.nodal_basis:
                if kind == "grad":
                    out.append(grad(p))
                elif kind == "curl":
                    out.append(p.curl2() if self.mesh_dim == 2 else p.curl3())
                else:
                    out.append(p.div())
            self._deriv = out
        return self._deriv

    # -- tabulation ------------------------------------------------------------

    def tabulate(self, points) -> np.ndarray:
        """Values of the nodal basis: (shape_dim, N) or (shape_dim, N, dim)."""
        return np.stack([p.eval(points) for p in self.nodal_basis])

    def tabulate_derivative(self, points) -> np.ndarray:
        der = self.nodal_derivatives
        if der is None:
            raise ValueError(f"{self.name} has no derivative operator")
        return np.stack([d.eval(points) for d in der])

    def __repr__(self):
        return f"<ElementFamily {self.name}: dim {self.mesh_dim}, k={self.form_degree}, {self.shape_dim} dofs>"


def apply_dofs(family: ElementFamily, field) -> np.ndarray:
    """Evaluate all reference DOFs on a field (callable, Poly or VecPoly)."""
    ev = field.eval if hasattr(field, "eval") else field
    return np.array([evaluate_dof(d, ev, family.mesh_dim) for d in family.dofs])


# -- catalog -------------------------------------------------------------------


def _scalar_span(dim, degree):
    return [Poly.monomial(dim, e) for e in monomial_exponents(dim, degree)]


def _vec(dim, comp, poly: Poly) -> VecPoly:
    zero = Poly(dim)
    comps = [zero] * dim
    comps[comp] = poly
    return VecPoly(comps)


def _p1_vector_span(dim):
    out = []
    for e in monomial_exponents(dim, 1):
        for comp in range(dim):
            out.append(_vec(dim, comp, Poly.monomial(dim, e)))
    return out


def _radial(dim) -> VecPoly:
    return VecPoly([Poly.variable(dim, ax) for ax in range(dim)])


def _rotated_radial() -> VecPoly:
    return VecPoly([-1.0 * Poly.variable(2, 1), Poly.variable(2, 0)])


def _build_lagrange(dim, p):
    dofs = [DofSpec(0, i, "value") for i in range(dim + 1)]
    for e_idx in range(len(local_entities(dim, 1))):
        for j in range(p - 1):
            dofs.append(DofSpec(1, e_idx, "scalar", (j,)))
    if dim == 2 and p >= 3:
        for exps in monomial_exponents(2, p - 3):
            dofs.append(DofSpec(2, 0, "interior", exps))
    name = f"lagrange{p}" + ("_3d" if dim == 3 else "")
    return ElementFamily(name, dim, 0, p, "h1", _scalar_span(dim, p), dofs)


def _build_dg(dim, p):
    dofs = [DofSpec(dim, 0, "interior", exps) for exps in monomial_exponents(dim, p)]
    name = f"dg{p}" + ("_3d" if dim == 3 else "")
    return ElementFamily(name, dim, dim, p, "l2", _scalar_span(dim, p), dofs)


def _build_edge_2d(p):
    if p == 1:
        span = [_vec(2, 0, Poly.constant(2, 1.0)), _vec(2, 1, Poly.constant(2, 1.0)), _rotated_radial()]
    else:
        rr = _rotated_radial()
        span = _p1_vector_span(2) + [
            VecPoly([Poly.variable(2, ax) * c for c in rr.comps]) for ax in (0, 1)
        ]
    dofs = []
    for e_idx in range(3):
        for j in range(p):
            dofs.append(DofSpec(1, e_idx, "tangential", (j,)))
    if p == 2:
        for comp in (0, 1):
            dofs.append(DofSpec(2, 0, "interior", (0, 0), comp))
    return ElementFamily(f"edge{p}", 2, 1, p, "covariant", span, dofs)


def _build_face_2d(p):
    if p == 1:
        span = [_vec(2, 0, Poly.constant(2, 1.0)), _vec(2, 1, Poly.constant(2, 1.0)), _radial(2)]
    else:
        rad = _radial(2)
        span = _p1_vector_span(2) + [
            VecPoly([Poly.variable(2, ax) * c for c in rad.comps]) for ax in (0, 1)
        ]
    dofs = []
    for e_idx in range(3):
        for j in range(p):
            dofs.append(DofSpec(1, e_idx, "normal", (j,)))
    if p == 2:
        for comp in (0, 1):
            dofs.append(DofSpec(2, 0, "interior", (0, 0), comp))
    return ElementFamily(f"face{p}", 2, 1, p, "contravariant", span, dofs)


def _build_edge_3d():
    x = [Poly.variable(3, ax) for ax in range(3)]
    zero = Poly(3)
    span = [
        _vec(3, 0, Poly.constant(3, 1.0)),
        _vec(3, 1, Poly.constant(3, 1.0)),
        _vec(3, 2, Poly.constant(3, 1.0)),
        VecPoly([zero, -1.0 * x[2], x[1]]),   # e1 cross x
        VecPoly([x[2], zero, -1.0 * x[0]]),   # e2 cross x
        VecPoly([-1.0 * x[1], x[0], zero]),   # e3 cross x
    ]
    dofs = [DofSpec(1, e_idx, "tangential", (0,)) for e_idx in range(6)]
    return ElementFamily("edge1_3d", 3, 1, 1, "covariant", span, dofs)


def _build_face_3d():
    span = [
        _vec(3, 0, Poly.constant(3, 1.0)),
        _vec(3, 1, Poly.constant(3, 1.0)),
        _vec(3, 2, Poly.constant(3, 1.0)),
        _radial(3),
    ]
    dofs = [DofSpec(2, f_idx, "normal", (0, 0)) for f_idx in range(4)]
    return ElementFamily("face1_3d", 3, 2, 1, "contravariant", span, dofs)


_BUILDERS = {
    "lagrange1": lambda: _build_lagrange(2, 1),
    "lagrange2": lambda: _build_lagrange(2, 2),
    "lagrange3": lambda: _build_lagrange(2, 3),
    "dg0": lambda: _build_dg(2, 0),
    "dg1": lambda: _build_dg(2, 1),
    "dg2": lambda: _build_dg(2, 2),
    "edge1": lambda: _build_edge_2d(1),
    "edge2": lambda: _build_edge_2d(2),
    "face1": lambda: _build_face_2d(1),
    "face2": lambda: _build_face_2d(2),
    "lagrange1_3d": lambda: _build_lagrange(3, 1),
    "dg0_3d": lambda: _build_dg(3, 0),
    "edge1_3d": _build_edge_3d,
    "face1_3d": _build_face_3d,
}

FAMILY_NAMES = tuple(sorted(_BUILDERS))


@lru_cache(maxsize=None)
def get_family(name: str) -> ElementFamily:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownFamilyError(f"family {name!r} not in catalog (choose from {', '.join(FAMILY_NAMES)})") from None
    return builder()


# -- local derivative ----------------------------------------------------------

_COMPLEX_STEPS = {
    ("h1", "covariant"),
    ("covariant", "l2"),        # 2D curl
    ("covariant", "contravariant"),  # 3D curl
    ("contravariant", "l2"),    # div
}


def local_derivative_matrix(fam_from: ElementFamily, fam_to: ElementFamily) -> np.ndarray:
    """Matrix taking source DOF values to the DOFs of the derivative.

    M[i, j] = dof_i^to(d phi_j^from).  The image of the derivative must
    lie in the target shape space; this is verified by reconstructing
    each image from its target DOFs.
    """
    if fam_from.mesh_dim != fam_to.mesh_dim:
        raise IncompatibleFamiliesError("families live on different reference simplices")
    if (fam_from.mapping, fam_to.mapping) not in _COMPLEX_STEPS:
        raise IncompatibleFamiliesError(
            f"{fam_from.name} -> {fam_to.name} is not a consecutive complex step"
        )
    if fam_from.mesh_dim == 2 and fam_from.mapping == "covariant" and fam_to.mapping == "contravariant":
        raise IncompatibleFamiliesError("2D curl lands in a scalar space")
    derivs = fam_from.nodal_derivatives
    M = np.empty((fam_to.shape_dim, fam_from.shape_dim))
    scale = max(max(abs(c) for p in _flatten(derivs) for c in p.terms.values()), 1.0)
    for j, dpoly in enumerate(derivs):
        coeffs = apply_dofs(fam_to, dpoly)
        M[:, j] = coeffs
        recon = _combine(fam_to.nodal_basis, coeffs)
        diff = dpoly - recon
        if not diff.almost_zero(1e-8 * scale):
            raise IncompatibleFamiliesError("derivative target does not contain image")
    return M


def _flatten(polys):
    out = []
    for p in polys:
        if isinstance(p, VecPoly):
            out.extend(p.comps)
        else:
            out.append(p)
    return out


def _combine(basis, coeffs):
    acc = basis[0] * float(coeffs[0])
    for c, b in zip(coeffs[1:], basis[1:]):
        if c != 0.0:
            acc = acc + b * float(c)
    return acc
