"""Tagged triangle meshes for the three-limb core benchmark geometry.

The geometry is a rectangular double-window core (three vertical limbs,
two yokes) with one coil rectangle in each window hugging the center
limb, surrounded by an air box a few core-sizes wide.  Meshing uses a
rectilinear grid whose break lines are snapped to every material
boundary, so region tags and coil areas are exact; each grid cell is
split into two positively oriented triangles.

The text format is lossless: floats are written in shortest round-trip
form, and writing a read mesh reproduces the file byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGIONS = ("iron", "coil_plus", "coil_minus", "air")
IRON, COIL_PLUS, COIL_MINUS, AIR = range(4)


@dataclass(frozen=True)
class GeometryParams:
    """Dimensions (m) and meshing targets for the core geometry.

    The default coil window is 0.02 x 0.025 m, i.e. a winding
    cross-section of 5e-4 m^2 per side.  ``air_factor`` scales the outer
    air box relative to the core outline.
    """

    limb_width: float = 0.03
    window_width: float = 0.04
    window_height: float = 0.05
    coil_width: float = 0.02
    coil_height: float = 0.025
    air_factor: float = 3.0
    mesh_core: float = 0.004
    mesh_air: float = 0.016

    def __post_init__(self):
        for name in ("limb_width", "window_width", "window_height", "coil_width",
                     "coil_height", "mesh_core", "mesh_air"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.air_factor <= 1.0:
            raise ValueError("air_factor must exceed 1")
        if self.coil_width > self.window_width or self.coil_height > self.window_height:
            raise ValueError("coil does not fit in the window")

    @property
    def core_width(self) -> float:
        return 3.0 * self.limb_width + 2.0 * self.window_width

    @property
    def core_height(self) -> float:
        return self.window_height + 2.0 * self.limb_width

    @property
    def coil_area(self) -> float:
        """Winding cross-section A_w per coil side, m^2."""
        return self.coil_width * self.coil_height

    @property
    def box_half(self) -> tuple:
        return (0.5 * self.air_factor * self.core_width,
                0.5 * self.air_factor * self.core_height)

    def coil_rects(self):
        """((x0, x1, y0, y1) for coil_plus, same for coil_minus)."""
        xl = 0.5 * self.limb_width
        yh = 0.5 * self.coil_height
        plus = (-xl - self.coil_width, -xl, -yh, yh)
        minus = (xl, xl + self.coil_width, -yh, yh)
        return plus, minus

    def window_rects(self):
        xl = 0.5 * self.limb_width
        yh = 0.5 * self.window_height
        left = (-xl - self.window_width, -xl, -yh, yh)
        right = (xl, xl + self.window_width, -yh, yh)
        return left, right


@dataclass
class Mesh2D:
    """Conforming triangulation with one region tag per triangle."""

    nodes: np.ndarray       # (N, 2) coordinates, m
    triangles: np.ndarray   # (M, 3) node indices, CCW
    region: np.ndarray      # (M,) index into REGIONS
    boundary_nodes: np.ndarray  # sorted node indices on the outer boundary

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self.region = np.asarray(self.region, dtype=np.int8)
        self.boundary_nodes = np.asarray(self.boundary_nodes, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def region_mask(self, name: str) -> np.ndarray:
        return self.region == REGIONS.index(name)


def _break_lines(lo, hi, marks, h_fine, h_coarse, fine_lo, fine_hi):
    """Monotone break points covering [lo, hi] through every mark, with
    target spacing h_fine inside [fine_lo, fine_hi] and h_coarse outside.

    Marks arising from different floating-point expressions of the same
    boundary are merged (they would otherwise create degenerate sliver
    cells)."""
    tol = 1e-9 * (hi - lo)
    raw = sorted([lo] + [m for m in marks if lo + tol < m < hi - tol] + [hi])
    marks = [raw[0]]
    for m in raw[1:]:
        if m - marks[-1] > tol:
            marks.append(m)
    pts = []
    for a, b in zip(marks[:-1], marks[1:]):
        mid = 0.5 * (a + b)
        h = h_fine if fine_lo - tol <= mid <= fine_hi + tol else h_coarse
        n = max(1, int(round((b - a) / h)))
        pts.extend(a + (b - a) * np.arange(n) / n)
    pts.append(marks[-1])
    return np.array(pts)


def _classify(geo: GeometryParams, x, y):
    """Region index for centroid points (vectorized)."""
    cw, ch = 0.5 * geo.core_width, 0.5 * geo.core_height
    in_core = (np.abs(x) <= cw) & (np.abs(y) <= ch)
    region = np.full(x.shape, AIR, dtype=np.int8)
    region[in_core] = IRON
    for rect, tag in zip(geo.window_rects(), (AIR, AIR)):
        x0, x1, y0, y1 = rect
        inside = (x > x0) & (x < x1) & (y > y0) & (y < y1)
        region[inside] = tag
    for rect, tag in zip(geo.coil_rects(), (COIL_PLUS, COIL_MINUS)):
        x0, x1, y0, y1 = rect
        inside = (x > x0) & (x < x1) & (y > y0) & (y < y1)
        region[inside] = tag
    return region


def build_geometry(geo: GeometryParams = GeometryParams()) -> Mesh2D:
    """Mesh the core geometry on a boundary-snapped rectilinear grid."""
    bx, by = geo.box_half
    cw, ch = 0.5 * geo.core_width, 0.5 * geo.core_height
    plus, minus = geo.coil_rects()
    lw, rw = geo.window_rects()

    x_marks = [-cw, -cw + geo.limb_width, lw[0], lw[1], plus[0], plus[1],
               minus[0], minus[1], rw[0], rw[1], cw - geo.limb_width, cw]
    y_marks = [-ch, ch, lw[2], lw[3], plus[2], plus[3]]
    xs = _break_lines(-bx, bx, x_marks, geo.mesh_core, geo.mesh_air, -cw, cw)
    ys = _break_lines(-by, by, y_marks, geo.mesh_core, geo.mesh_air, -ch, ch)

    nx, ny = xs.size, ys.size
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * ny + j

    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    p00, p10 = nid(ii, jj), nid(ii + 1, jj)
    p11, p01 = nid(ii + 1, jj + 1), nid(ii, jj + 1)
    tris = np.empty((2 * ii.size, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([p00, p10, p11])
    tris[1::2] = np.column_stack([p00, p11, p01])

    cent = nodes[tris].mean(axis=1)
    region = _classify(geo, cent[:, 0], cent[:, 1])

    tol = 1e-9 * max(bx, by)
    on_edge = (np.abs(np.abs(nodes[:, 0]) - bx) < tol) | \
              (np.abs(np.abs(nodes[:, 1]) - by) < tol)
    return Mesh2D(nodes, tris, region, np.flatnonzero(on_edge))


def refine_uniform(mesh: Mesh2D) -> Mesh2D:
    """Red refinement: split every triangle into four via edge midpoints.

    Conforming (all triangles split), region tags inherited, boundary
    nodes re-detected on the preserved bounding box.
    """
    npts = mesh.n_nodes
    midpoint = {}

    def mid(a, b):
        nonlocal npts
        key = (a, b) if a < b else (b, a)
        m = midpoint.get(key)
        if m is None:
            m = npts
            midpoint[key] = m
            npts += 1
        return m

    tris = []
    region = []
    for (a, b, c), reg in zip(mesh.triangles, mesh.region):
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        region.extend([reg] * 4)

    mids = np.empty((len(midpoint), 2))
    for (a, b), m in midpoint.items():
        mids[m - mesh.n_nodes] = 0.5 * (mesh.nodes[a] + mesh.nodes[b])
    all_nodes = np.vstack([mesh.nodes, mids])

    bx = np.abs(all_nodes[:, 0]).max()
    by = np.abs(all_nodes[:, 1]).max()
    tol = 1e-9 * max(bx, by)
    on_edge = (np.abs(np.abs(all_nodes[:, 0]) - bx) < tol) | \
              (np.abs(np.abs(all_nodes[:, 1]) - by) < tol)
    return Mesh2D(all_nodes, np.array(tris, dtype=np.int64),
                  np.array(region, dtype=np.int8), np.flatnonzero(on_edge))


def default_probes(geo: GeometryParams = GeometryParams()) -> dict:
    """Probe coordinates inside the iron limbs: center limb and the two
    outer limbs at mid-height."""
    xl = geo.limb_width + geo.window_width
    return {"C6": (0.0, 0.0), "C12": (-xl, 0.0), "C34": (xl, 0.0)}


def find_triangle(mesh: Mesh2D, point) -> int:
    """Index of a triangle containing ``point`` (barycentric test)."""
    p = np.asarray(point, dtype=float)
    v = mesh.nodes[mesh.triangles]
    d = v - p
    c0 = d[:, 0, 0] * d[:, 1, 1] - d[:, 0, 1] * d[:, 1, 0]
    c1 = d[:, 1, 0] * d[:, 2, 1] - d[:, 1, 1] * d[:, 2, 0]
    c2 = d[:, 2, 0] * d[:, 0, 1] - d[:, 2, 1] * d[:, 0, 0]
    eps = -1e-14 * max(abs(float(p[0])) + abs(float(p[1])), 1.0)
    hits = np.flatnonzero((c0 >= eps) & (c1 >= eps) & (c2 >= eps))
    if hits.size == 0:
        raise ValueError(f"point {point} outside the mesh")
    return int(hits[0])


def write_mesh_text(mesh: Mesh2D, path):
    """Write the bit-exact text format: a ``nodes <N> triangles <M>``
    header, N coordinate lines, M ``n1 n2 n3 region`` lines."""
    with open(path, "w") as f:
        f.write(f"nodes {mesh.n_nodes} triangles {mesh.n_triangles}\n")
        for x, y in mesh.nodes:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        for (a, b, c), reg in zip(mesh.triangles, mesh.region):
            f.write(f"{int(a)} {int(b)} {int(c)} {REGIONS[reg]}\n")


def read_mesh_text(path) -> Mesh2D:
    """Read the text format; boundary nodes are inferred from the mesh
    bounding box."""
    with open(path) as f:
        head = f.readline().split()
        if len(head) != 4 or head[0] != "nodes" or head[2] != "triangles":
            raise ValueError("bad mesh header")
        n, m = int(head[1]), int(head[3])
        nodes = np.empty((n, 2))
        for i in range(n):
            sx, sy = f.readline().split()
            nodes[i] = (float(sx), float(sy))
        tris = np.empty((m, 3), dtype=np.int64)
        region = np.empty(m, dtype=np.int8)
        for i in range(m):
            a, b, c, reg = f.readline().split()
            tris[i] = (int(a), int(b), int(c))
            region[i] = REGIONS.index(reg)
    bx = np.abs(nodes[:, 0]).max()
    by = np.abs(nodes[:, 1]).max()
    tol = 1e-9 * max(bx, by)
    on_edge = (np.abs(np.abs(nodes[:, 0]) - bx) < tol) | \
              (np.abs(np.abs(nodes[:, 1]) - by) < tol)
    return Mesh2D(nodes, tris, region, np.flatnonzero(on_edge))
