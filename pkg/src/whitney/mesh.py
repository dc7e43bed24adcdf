"""Oriented simplicial meshes: triangles in 2D, tetrahedra in 3D.

Every entity table is derived deterministically from the top-level
simplices: each k-simplex is stored with strictly increasing vertex
indices and tables are sorted lexicographically.  Storing everything in
ascending order makes the induced orientation of any sub-simplex agree
with its stored orientation, so local-to-global orientation signs are
the parity of an identity permutation (always +1); tangents run from
the lower to the higher vertex index and 2D edge normals are the
tangent rotated clockwise by 90 degrees.

Text format (comments start with '#'):

    mesh <dim> <nvertices> <nsimplices>
    v <x> <y> [<z>]          one line per vertex
    s <i0> <i1> <i2> [<i3>]  one line per top-level simplex
"""
from __future__ import annotations

import itertools
from io import StringIO

import numpy as np


class MeshFormatError(ValueError):
    """Raised for malformed mesh text or invalid mesh data."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Mesh:
    """Conforming simplicial mesh with derived entity tables.

    Parameters
    ----------
    dim : int
        Topological (= geometric) dimension, 2 or 3.
    vertices : array_like, shape (V, dim)
        Vertex coordinates.
    cells : array_like, shape (T, dim+1)
        Top-level simplices as vertex index tuples (any order; they are
        canonicalized to ascending order).
    domain_tag : str
        Free-form description used in reports.
    """

    def __init__(self, dim, vertices, cells, domain_tag=""):
        if dim not in (2, 3):
            raise MeshFormatError(f"unsupported dimension {dim}")
        self.dim = int(dim)
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != dim:
            raise MeshFormatError("vertex array must have shape (V, dim)")
        if not np.all(np.isfinite(self.vertices)):
            raise MeshFormatError("non-finite vertex coordinate")
        self.domain_tag = domain_tag

        cells = np.asarray(cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[1] != dim + 1:
            raise MeshFormatError("cell array must have shape (T, dim+1)")
        if cells.shape[0] == 0:
            raise MeshFormatError("no simplices")
        nv = self.vertices.shape[0]
        if cells.min() < 0 or cells.max() >= nv:
            raise MeshFormatError("vertex index out of range")
        cells = np.sort(cells, axis=1)
        if np.any(cells[:, :-1] == cells[:, 1:]):
            raise MeshFormatError("degenerate simplex (repeated vertex)")
        cells = cells[np.lexsort(cells.T[::-1])]
        if cells.shape[0] > 1 and np.any(np.all(cells[:-1] == cells[1:], axis=1)):
            raise MeshFormatError("duplicate simplex")

        self.entities: list[np.ndarray] = [None] * (dim + 1)
        self.entities[0] = np.arange(nv, dtype=np.int64).reshape(-1, 1)
        self.entities[dim] = cells
        for k in range(1, dim):
            subs = set()
            for cell in cells:
                for combo in itertools.combinations(cell.tolist(), k + 1):
                    subs.add(combo)
            self.entities[k] = np.array(sorted(subs), dtype=np.int64)

        self._index: list[dict] = [
            {tuple(row): i for i, row in enumerate(tab.tolist())} for tab in self.entities
        ]

        # cell -> sub-entity id tables; local sub-entities enumerated in
        # lexicographic order of local vertex index tuples
        self._cell_sub: list[np.ndarray] = [None] * (dim + 1)
        for k in range(dim + 1):
            combos = list(itertools.combinations(range(dim + 1), k + 1))
            table = np.empty((cells.shape[0], len(combos)), dtype=np.int64)
            for c, cell in enumerate(cells.tolist()):
                for j, combo in enumerate(combos):
                    table[c, j] = self._index[k][tuple(cell[i] for i in combo)]
            self._cell_sub[k] = table

        self._derive_boundary()
        self._check_conformity()
        degenerate = np.abs(self.signed_cell_volumes()) <= 1e-14 * self.scale() ** dim
        if np.any(degenerate):
            raise MeshFormatError("degenerate simplex (zero volume)")
        for tab in self.entities:
            tab.setflags(write=False)
        self.vertices.setflags(write=False)

    # -- derived structure -------------------------------------------------

    def _derive_boundary(self):
        dim = self.dim
        facets = self.entities[dim - 1]
        counts = np.zeros(facets.shape[0], dtype=np.int64)
        for c in range(self.num_cells):
            for fid in self._cell_sub[dim - 1][c]:
                counts[fid] += 1
        self._facet_cell_count = counts
        self.boundary: list[np.ndarray] = [None] * (dim + 1)
        self.boundary[dim - 1] = counts == 1
        self.boundary[dim] = np.zeros(self.num_cells, dtype=bool)
        bverts = np.zeros(self.num_vertices, dtype=bool)
        for fid in np.nonzero(self.boundary[dim - 1])[0]:
            bverts[facets[fid]] = True
        self.boundary[0] = bverts
        if dim == 3:
            bedges = np.zeros(self.entities[1].shape[0], dtype=bool)
            for fid in np.nonzero(self.boundary[2])[0]:
                a, b, c = self.entities[2][fid].tolist()
                for pair in ((a, b), (a, c), (b, c)):
                    bedges[self._index[1][pair]] = True
            self.boundary[1] = bedges
        for flags in self.boundary:
            flags.setflags(write=False)

    def _check_conformity(self):
        bad = np.nonzero(self._facet_cell_count > 2)[0]
        if bad.size:
            raise MeshFormatError(
                f"non-conforming mesh: facet {bad[0]} shared by {self._facet_cell_count[bad[0]]} cells"
            )

    # -- queries -----------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.entities[self.dim].shape[0]

    @property
    def cells(self) -> np.ndarray:
        return self.entities[self.dim]

    def num_entities(self, k: int) -> int:
        return self.entities[k].shape[0]

    def entity_id(self, k: int, verts) -> int:
        return self._index[k][tuple(sorted(int(v) for v in verts))]

    def cell_subentities(self, k: int) -> np.ndarray:
        """(num_cells, C(dim+1, k+1)) array of global sub-entity ids."""
        return self._cell_sub[k]

    def local_subentity_vertices(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(self.dim + 1), k + 1))

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** k * self.num_entities(k) for k in range(self.dim + 1)))

    def scale(self) -> float:
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(max(span.max(), 1.0))

    def signed_cell_volumes(self) -> np.ndarray:
        """Signed volume det[v1-v0, ..., vd-v0] / d! per cell."""
        v = self.vertices[self.cells]
        edges = v[:, 1:, :] - v[:, :1, :]
        dets = np.linalg.det(edges)
        return dets / np.prod(range(1, self.dim + 1))

    def entity_measures(self, k: int) -> np.ndarray:
        """Unsigned k-volume of each k-entity."""
        tab = self.entities[k]
        if k == 0:
            return np.ones(tab.shape[0])
        pts = self.vertices[tab]
        if k == 1:
            return np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        if k == 2:
            a = pts[:, 1] - pts[:, 0]
            b = pts[:, 2] - pts[:, 0]
            if self.dim == 2:
                return 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
            return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)
        if k == 3:
            return np.abs(self.signed_cell_volumes())
        raise ValueError(f"bad entity dimension {k}")

    def orientation_sign(self, cell_index: int, k: int, local_index: int) -> int:
        """Parity of stored vs induced ordering of a sub-entity.

        Cells and entities are both stored ascending, so the permutation
        is the identity and the sign is always +1; kept explicit so the
        convention is checked rather than assumed.
        """
        cell = self.cells[cell_index].tolist()
        combo = self.local_subentity_vertices(k)[local_index]
        induced = [cell[i] for i in combo]
        stored = sorted(induced)
        perm = [induced.index(v) for v in stored]
        sign = 1
        seen = [False] * len(perm)
        for i in range(len(perm)):
            if seen[i]:
                continue
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        return sign


# -- generators --------------------------------------------------------------


def generate_square_mesh(n: int, pattern: str = "uniform", side: float = 1.0) -> Mesh:
    """Structured triangulation of [0, side]^2.

    pattern "uniform": each grid cell split along the same diagonal
    (2 n^2 triangles).  pattern "crossed": each grid cell split into 4
    triangles around its centroid (4 n^2 triangles).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if pattern not in ("uniform", "crossed"):
        raise ValueError(f"unknown pattern {pattern!r}")
    xs = np.linspace(0.0, side, n + 1)
    grid = np.array([(x, y) for y in xs for x in xs])

    def gid(i, j):
        return j * (n + 1) + i

    cells = []
    if pattern == "uniform":
        verts = grid
        for j in range(n):
            for i in range(n):
                v00, v10 = gid(i, j), gid(i + 1, j)
                v01, v11 = gid(i, j + 1), gid(i + 1, j + 1)
                cells.append((v00, v10, v11))
                cells.append((v00, v01, v11))
    else:
        centers = np.array(
            [((xs[i] + xs[i + 1]) / 2, (xs[j] + xs[j + 1]) / 2) for j in range(n) for i in range(n)]
        )
        verts = np.vstack([grid, centers])
        for j in range(n):
            for i in range(n):
                c = (n + 1) ** 2 + j * n + i
                v00, v10 = gid(i, j), gid(i + 1, j)
                v01, v11 = gid(i, j + 1), gid(i + 1, j + 1)
                for a, b in ((v00, v10), (v10, v11), (v11, v01), (v01, v00)):
                    cells.append((a, b, c))
    tag = f"square(n={n},pattern={pattern},side={side:g})"
    return Mesh(2, verts, cells, domain_tag=tag)


def generate_cube_mesh(n: int, side: float = 1.0) -> Mesh:
    """Kuhn subdivision of [0, side]^3: each grid cube split into the 6
    tetrahedra around its main diagonal.  Identical orientation in every
    cube keeps face diagonals matched, hence the mesh conforming."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, side, n + 1)
    verts = np.array([(x, y, z) for z in xs for y in xs for x in xs])

    def gid(i, j, k):
        return (k * (n + 1) + j) * (n + 1) + i

    perms = list(itertools.permutations(range(3)))
    cells = []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                base = np.array([i, j, k])
                for perm in perms:
                    path = [base.copy()]
                    for axis in perm:
                        nxt = path[-1].copy()
                        nxt[axis] += 1
                        path.append(nxt)
                    cells.append(tuple(gid(*p) for p in path))
    tag = f"cube(n={n},side={side:g})"
    return Mesh(3, verts, cells, domain_tag=tag)


def generate_annulus_mesh(n: int, r_inner: float = 0.5, r_outer: float = 1.0) -> Mesh:
    """Structured annulus with n angular subdivisions.

    The number of radial cell rings is chosen so triangles stay roughly
    isotropic; n=8 with the default radii gives a single ring (16
    vertices, 16 boundary edges).
    """
    if n < 8:
        raise ValueError("n must be >= 8")
    if not (0.0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    rings = max(1, round(n * (r_outer - r_inner) / (np.pi * (r_inner + r_outer))))
    radii = np.linspace(r_inner, r_outer, rings + 1)
    theta = 2.0 * np.pi * np.arange(n) / n
    verts = np.array([(r * np.cos(t), r * np.sin(t)) for r in radii for t in theta])

    def gid(ring, j):
        return ring * n + j % n

    cells = []
    for ring in range(rings):
        for j in range(n):
            a, b = gid(ring, j), gid(ring, j + 1)
            c, d = gid(ring + 1, j), gid(ring + 1, j + 1)
            cells.append((a, b, d))
            cells.append((a, c, d))
    tag = f"annulus(n={n},r_inner={r_inner:g},r_outer={r_outer:g})"
    return Mesh(2, verts, cells, domain_tag=tag)


def generate_disk_mesh(n: int, radius: float = 1.0) -> Mesh:
    """Structured disk: a central fan surrounded by n-1 concentric bands,
    all rings carrying 6n vertices."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 6 * n
    theta = 2.0 * np.pi * np.arange(m) / m
    verts = [(0.0, 0.0)]
    for ring in range(1, n + 1):
        r = radius * ring / n
        verts.extend((r * np.cos(t), r * np.sin(t)) for t in theta)
    verts = np.array(verts)

    def gid(ring, j):
        return 1 + (ring - 1) * m + j % m

    cells = []
    for j in range(m):
        cells.append((0, gid(1, j), gid(1, j + 1)))
    for ring in range(1, n):
        for j in range(m):
            a, b = gid(ring, j), gid(ring, j + 1)
            c, d = gid(ring + 1, j), gid(ring + 1, j + 1)
            cells.append((a, b, d))
            cells.append((a, c, d))
    tag = f"disk(n={n},radius={radius:g})"
    return Mesh(2, verts, cells, domain_tag=tag)


def generate_ellipse_mesh(n: int, aspect: float = 3.0) -> Mesh:
    """Disk triangulation stretched affinely along the x axis."""
    disk = generate_disk_mesh(n)
    verts = disk.vertices.copy()
    verts[:, 0] *= aspect
    return Mesh(2, verts, disk.cells, domain_tag=f"ellipse(n={n},aspect={aspect:g})")


# -- text format -------------------------------------------------------------


def read_mesh(source) -> Mesh:
    """Parse the text format from a string or file-like object."""
    if isinstance(source, str):
        source = StringIO(source)
    header = None
    verts: list[tuple[float, ...]] = []
    cells: list[tuple[int, ...]] = []
    dim = nv = ns = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if fields[0] != "mesh" or len(fields) != 4:
                raise MeshFormatError("malformed header, expected 'mesh <dim> <nv> <ns>'", lineno)
            try:
                dim, nv, ns = (int(f) for f in fields[1:])
            except ValueError:
                raise MeshFormatError("malformed header, expected integers", lineno) from None
            if dim not in (2, 3):
                raise MeshFormatError(f"unsupported dimension {dim}", lineno)
            if ns <= 0:
                raise MeshFormatError("no simplices", lineno)
            header = fields
            continue
        if fields[0] == "v":
            if len(cells):
                raise MeshFormatError("vertex line after simplex lines", lineno)
            if len(fields) != dim + 1:
                raise MeshFormatError(f"malformed vertex line, expected {dim} coordinates", lineno)
            try:
                verts.append(tuple(float(f) for f in fields[1:]))
            except ValueError:
                raise MeshFormatError("malformed vertex coordinate", lineno) from None
        elif fields[0] == "s":
            if len(fields) != dim + 2:
                raise MeshFormatError(f"malformed simplex line, expected {dim + 1} vertex indices", lineno)
            try:
                idx = tuple(int(f) for f in fields[1:])
            except ValueError:
                raise MeshFormatError("malformed vertex index", lineno) from None
            if any(i < 0 or i >= nv for i in idx):
                raise MeshFormatError("vertex index out of range", lineno)
            cells.append(idx)
        else:
            raise MeshFormatError(f"malformed line, unknown record {fields[0]!r}", lineno)
    if header is None:
        raise MeshFormatError("empty mesh file")
    if len(verts) != nv:
        raise MeshFormatError(f"expected {nv} vertices, found {len(verts)}")
    if len(cells) != ns:
        raise MeshFormatError(f"expected {ns} simplices, found {len(cells)}")
    return Mesh(dim, np.array(verts), cells, domain_tag="file")


def write_mesh(mesh: Mesh, stream=None) -> str:
    """Serialize to the text format; returns the text (and writes to
    `stream` when given).  repr() of the coordinates makes the round
    trip bit-exact."""
    lines = [f"mesh {mesh.dim} {mesh.num_vertices} {mesh.num_cells}"]
    for v in mesh.vertices:
        lines.append("v " + " ".join(repr(float(x)) for x in v))
    for cell in mesh.cells:
        lines.append("s " + " ".join(str(int(i)) for i in cell))
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text
