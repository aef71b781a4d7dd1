"""Alpha complexes and degree-one persistence for planar point clouds.

The offset filtration of a finite planar cloud (union of disks of growing
radius) is carried combinatorially by the alpha complex on the Delaunay
triangulation: a simplex enters at the radius where its restricted Voronoi
cell first meets the growing disks. Degree-one persistence is computed two
independent ways:

* ``dual``: a reverse-filtration merge process on the face-adjacency graph.
  In the plane a hole is a bounded component of the uncovered region, so
  running the filtration backwards turns hole births/deaths into union-find
  merges. Linear work after sorting; the default.
* ``reduction``: textbook Z2 boundary-matrix column reduction in filtration
  order. Quadratic worst case, kept as the cross-checked reference.

Both produce identical pairs (tested), including tie handling: the filtration
total order is (alpha, dimension, canonical simplex index) with simplices
canonically numbered after a lexicographic sort of the deduplicated points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from . import predicates
from .accel import merge_pairs, merge_pairs_python
from .errors import InvalidParameterError

__all__ = [
    "RadiusWindow",
    "AlphaComplex",
    "PersistencePairs",
    "BettiCurve",
    "build_alpha_complex",
    "persistence_deg1",
    "betti_curve",
    "betti_numbers_at_radius",
    "betti1_at_radius",
]


@dataclass(frozen=True)
class RadiusWindow:
    """Radius window [r0, r1] with 0 < r0 < r1."""

    r0: float
    r1: float

    def __post_init__(self) -> None:
        if not (0.0 < self.r0 < self.r1 and np.isfinite(self.r1)):
            raise InvalidParameterError(
                f"window must satisfy 0 < r0 < r1, got [{self.r0}, {self.r1}]")

    @property
    def width(self) -> float:
        return self.r1 - self.r0


@dataclass(frozen=True)
class AlphaComplex:
    """Alpha filtration data over the canonical (sorted, deduplicated) cloud.

    ``edge_faces`` holds the one or two triangle ids bordering each edge,
    padded with ``n_triangles`` which denotes the outer face.
    """

    points: np.ndarray
    triangles: np.ndarray
    tri_alpha: np.ndarray
    tri_edges: np.ndarray
    edges: np.ndarray
    edge_alpha: np.ndarray
    edge_faces: np.ndarray
    n_duplicates: int
    collinear: bool

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


@dataclass(frozen=True)
class PersistencePairs:
    """Degree-one persistence pairs, sorted by (birth, death).

    Every stored pair satisfies birth < death. The raw pairing is a bijection
    onto triangles (each triangle kills one cycle); pairs with birth == death
    carry no topology at any radius and are dropped, their count is kept in
    ``n_zero``. ``essential`` is the number of classes that never die, always
    zero for a finite cloud.
    """

    births: np.ndarray
    deaths: np.ndarray
    n_zero: int
    essential: int = 0

    @property
    def n_pairs(self) -> int:
        return len(self.births)

    @property
    def n_raw(self) -> int:
        return len(self.births) + self.n_zero

    def betti1(self, r: float) -> int:
        """Number of pairs alive at radius r (birth <= r < death)."""
        return int(np.count_nonzero((self.births <= r) & (r < self.deaths)))


@dataclass(frozen=True)
class BettiCurve:
    """Right-continuous step function beta1(r) restricted to a window.

    ``values[i]`` holds on [breakpoints[i], breakpoints[i+1]) and the last
    value holds through r1. breakpoints[0] == r0.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    window: RadiusWindow

    def value_at(self, r: float) -> int:
        if not (self.window.r0 <= r <= self.window.r1):
            raise InvalidParameterError(
                f"radius {r} outside window [{self.window.r0}, {self.window.r1}]")
        idx = int(np.searchsorted(self.breakpoints, r, side="right")) - 1
        return int(self.values[idx])


def build_alpha_complex(points: np.ndarray) -> AlphaComplex:
    """Build the alpha filtration of a planar cloud.

    Points are lexicographically sorted and exact duplicates removed, which
    makes every downstream quantity independent of input order. Collinear
    clouds (including n <= 2) degenerate to a chain of consecutive edges with
    no triangles.

    Edge alpha values follow the standard rule: half the length for Gabriel
    edges (diametral disk empty of other points, decided by an exact-sign
    predicate), otherwise the smallest circumradius among bordering triangles.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise InvalidParameterError(f"points must be a nonempty (n, 2) array, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidParameterError("points must be finite")

    uniq = np.unique(pts, axis=0)
    n_dup = len(pts) - len(uniq)

    if len(uniq) <= 2:
        return _collinear_complex(uniq, n_dup)
    try:
        tri = Delaunay(uniq)
    except QhullError:
        if predicates.all_collinear(uniq):
            return _collinear_complex(uniq, n_dup)
        if len(uniq) == 3:
            # one nearly flat triangle: its circumradius is far beyond any
            # finite window, so the chain is an equivalent reading, and the
            # joggle below needs at least four points to seat the lifted
            # simplex anyway
            return _collinear_complex(uniq, n_dup)
        # nearly collinear: qhull cannot seat an initial simplex even though
        # the cloud is not exactly flat. Joggled input (repeatable in qhull,
        # so runs stay deterministic) produces sliver triangles whose
        # circumradii are enormous, hence invisible to any finite window.
        tri = Delaunay(uniq, qhull_options="Qbb Qc Q12 QJ")
    if len(tri.simplices) == 0:
        return _collinear_complex(uniq, n_dup)

    simp = np.sort(tri.simplices.astype(np.int64), axis=1)
    roworder = np.lexsort((simp[:, 2], simp[:, 1], simp[:, 0]))
    simp = simp[roworder]
    nt = len(simp)

    # edge table: three edges per triangle, deduplicated with owners kept
    raw_edges = np.concatenate([simp[:, [0, 1]], simp[:, [0, 2]], simp[:, [1, 2]]])
    owner = np.tile(np.arange(nt, dtype=np.int64), 3)
    eorder = np.lexsort((raw_edges[:, 1], raw_edges[:, 0]))
    sorted_edges = raw_edges[eorder]
    sorted_owner = owner[eorder]
    is_new = np.ones(len(sorted_edges), dtype=bool)
    is_new[1:] = (sorted_edges[1:] != sorted_edges[:-1]).any(axis=1)
    edge_id_sorted = np.cumsum(is_new) - 1
    ne = int(edge_id_sorted[-1]) + 1
    edges = sorted_edges[is_new]
    edge_faces = np.full((ne, 2), nt, dtype=np.int64)
    edge_faces[edge_id_sorted[is_new], 0] = sorted_owner[is_new]
    edge_faces[edge_id_sorted[~is_new], 1] = sorted_owner[~is_new]
    edge_id_raw = np.empty(3 * nt, dtype=np.int64)
    edge_id_raw[eorder] = edge_id_sorted
    tri_edges = edge_id_raw.reshape(3, nt).T.copy()

    tri_alpha = _circumradii(uniq, simp)
    edge_alpha = _edge_alphas(uniq, edges, edge_faces, simp, tri_alpha, nt)
    # float dust can leave a Gabriel edge a hair above its triangle; clamp so
    # the filtration is monotone (a face never precedes its boundary)
    tri_alpha = np.maximum(tri_alpha, edge_alpha[tri_edges].max(axis=1))

    return AlphaComplex(points=uniq, triangles=simp, tri_alpha=tri_alpha,
                        tri_edges=tri_edges, edges=edges, edge_alpha=edge_alpha,
                        edge_faces=edge_faces, n_duplicates=n_dup, collinear=False)


def _collinear_complex(uniq: np.ndarray, n_dup: int) -> AlphaComplex:
    # chain of consecutive edges along the (lexicographically sorted) line
    n = len(uniq)
    if n >= 2:
        edges = np.column_stack([np.arange(n - 1), np.arange(1, n)]).astype(np.int64)
        seg = uniq[1:] - uniq[:-1]
        edge_alpha = 0.5 * np.hypot(seg[:, 0], seg[:, 1])
    else:
        edges = np.empty((0, 2), dtype=np.int64)
        edge_alpha = np.empty(0)
    return AlphaComplex(points=uniq,
                        triangles=np.empty((0, 3), dtype=np.int64),
                        tri_alpha=np.empty(0),
                        tri_edges=np.empty((0, 3), dtype=np.int64),
                        edges=edges, edge_alpha=edge_alpha,
                        edge_faces=np.zeros((len(edges), 2), dtype=np.int64),
                        n_duplicates=n_dup, collinear=True)


def _circumradii(pts: np.ndarray, simp: np.ndarray) -> np.ndarray:
    a = pts[simp[:, 0]]
    b = pts[simp[:, 1]]
    c = pts[simp[:, 2]]
    ab = b - a
    ac = c - a
    bc = c - b
    cross = ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0]
    la = np.einsum("ij,ij->i", bc, bc)
    lb = np.einsum("ij,ij->i", ac, ac)
    lc = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(la * lb * lc) / (2.0 * np.abs(cross))
    return np.where(cross == 0.0, np.inf, r)


def _edge_alphas(pts, edges, edge_faces, simp, tri_alpha, nt) -> np.ndarray:
    ne = len(edges)
    seg = pts[edges[:, 1]] - pts[edges[:, 0]]
    half_len = 0.5 * np.hypot(seg[:, 0], seg[:, 1])
    gabriel = np.ones(ne, dtype=bool)
    min_adj = np.full(ne, np.inf)

    p = pts[edges[:, 0]]
    q = pts[edges[:, 1]]
    vsum = edges[:, 0] + edges[:, 1]
    for side in (0, 1):
        face = edge_faces[:, side]
        has = face < nt
        if not np.any(has):
            continue
        apex_id = simp[face[has]].sum(axis=1) - vsum[has]
        z = pts[apex_id]
        ax = 2.0 * z[:, 0] - p[has, 0] - q[has, 0]
        ay = 2.0 * z[:, 1] - p[has, 1] - q[has, 1]
        bx = q[has, 0] - p[has, 0]
        by = q[has, 1] - p[has, 1]
        lhs = ax * ax + ay * ay
        rhs = bx * bx + by * by
        d = lhs - rhs
        scale = lhs + rhs
        inside = d < -1e-13 * scale
        borderline = np.abs(d) <= 1e-13 * scale
        if np.any(borderline):
            idx_local = np.flatnonzero(borderline)
            idx_global = np.flatnonzero(has)[idx_local]
            for il, ig in zip(idx_local, idx_global):
                zz = z[il]
                sign = predicates.diametral_sign(p[ig, 0], p[ig, 1], q[ig, 0], q[ig, 1],
                                                 zz[0], zz[1])
                if sign < 0:
                    inside[il] = True
        g = np.flatnonzero(has)
        gabriel[g[inside]] = False
        min_adj[g] = np.minimum(min_adj[g], tri_alpha[face[has]])

    return np.where(gabriel, half_len, min_adj)


def _filtration_events(cx: AlphaComplex):
    ne, nt = cx.n_edges, cx.n_triangles
    alpha = np.concatenate([cx.edge_alpha, cx.tri_alpha])
    dim = np.concatenate([np.ones(ne, dtype=np.int8), np.full(nt, 2, dtype=np.int8)])
    ref = np.concatenate([np.arange(ne, dtype=np.int64), np.arange(nt, dtype=np.int64)])
    order = np.lexsort((ref, dim, alpha))
    return order, dim, ref, alpha


def persistence_deg1(cx: AlphaComplex, method: str = "dual") -> PersistencePairs:
    """Degree-one persistence pairs of the alpha filtration.

    method is "dual" (reverse merge process, default) or "reduction"
    (boundary-matrix column reduction). Outputs are identical; the reduction
    is quadratic worst case and meant for cross-validation and small inputs.
    """
    if method not in ("dual", "reduction", "dual-python"):
        raise InvalidParameterError(f"unknown persistence method {method!r}")
    nt = cx.n_triangles
    if nt == 0:
        return PersistencePairs(births=np.empty(0), deaths=np.empty(0), n_zero=0)

    order, dim, ref, _ = _filtration_events(cx)
    if method in ("dual", "dual-python"):
        kernel = merge_pairs if method == "dual" else merge_pairs_python
        births, deaths, k = kernel(order, dim, ref, cx.edge_alpha, cx.tri_alpha,
                                   np.ascontiguousarray(cx.edge_faces[:, 0]),
                                   np.ascontiguousarray(cx.edge_faces[:, 1]), nt)
        births = births[:k]
        deaths = deaths[:k]
        if k != nt:
            raise AssertionError(f"dual merge produced {k} pairs for {nt} triangles")
    else:
        births, deaths = _reduction_pairs(cx, order, dim, ref)

    keep = births < deaths
    n_zero = int(len(births) - keep.sum())
    births = births[keep]
    deaths = deaths[keep]
    srt = np.lexsort((deaths, births))
    return PersistencePairs(births=births[srt], deaths=deaths[srt], n_zero=n_zero)


def _reduction_pairs(cx: AlphaComplex, order, dim, ref):
    """Z2 column reduction restricted to triangle columns.

    Columns live over edge filtration positions; reducing a triangle column
    to its lowest surviving edge yields the (birth edge, death triangle)
    pairing. In a planar complex no triangle column can vanish.
    """
    pos_of_edge = np.empty(cx.n_edges, dtype=np.int64)
    edge_at_pos: dict[int, int] = {}
    for s, ev in enumerate(order):
        if dim[ev] == 1:
            pos_of_edge[ref[ev]] = s
            edge_at_pos[s] = int(ref[ev])
    low_to_col: dict[int, frozenset] = {}
    births = []
    deaths = []
    for s in range(len(order)):
        ev = order[s]
        if dim[ev] != 2:
            continue
        t = int(ref[ev])
        col = frozenset(int(pos_of_edge[e]) for e in cx.tri_edges[t])
        while col:
            low = max(col)
            other = low_to_col.get(low)
            if other is None:
                break
            col = col ^ other
        if not col:
            raise AssertionError("triangle column reduced to zero in a planar complex")
        low = max(col)
        low_to_col[low] = col
        births.append(cx.edge_alpha[edge_at_pos[low]])
        deaths.append(cx.tri_alpha[t])
    return np.asarray(births), np.asarray(deaths)


def betti_curve(pairs: PersistencePairs, window: RadiusWindow) -> BettiCurve:
    """Step function beta1(r) on [r0, r1] from persistence pairs."""
    r0, r1 = window.r0, window.r1
    b, d = pairs.births, pairs.deaths
    base = int(np.count_nonzero((b <= r0) & (r0 < d)))
    ups = b[(b > r0) & (b <= r1)]
    downs = d[(d > r0) & (d <= r1)]
    radii = np.concatenate([ups, downs])
    if len(radii) == 0:
        return BettiCurve(breakpoints=np.array([r0]), values=np.array([base]),
                          window=window)
    deltas = np.concatenate([np.ones(len(ups), dtype=np.int64),
                             -np.ones(len(downs), dtype=np.int64)])
    srt = np.argsort(radii, kind="stable")
    radii = radii[srt]
    deltas = deltas[srt]
    uniq_r, start = np.unique(radii, return_index=True)
    jump = np.add.reduceat(deltas, start)
    bps = np.concatenate([[r0], uniq_r])
    vals = base + np.concatenate([[0], np.cumsum(jump)])
    return BettiCurve(breakpoints=bps, values=vals, window=window)


def betti_numbers_at_radius(cx: AlphaComplex, r: float) -> tuple[int, int]:
    """(beta0, beta1) of the alpha subcomplex at level r via Euler's identity.

    Independent of the persistence pairing: counts components of the level-r
    subcomplex with union-find and uses beta1 = beta0 - (V - E + F). Kept as
    a second route for consistency tests.
    """
    if r < 0:
        raise InvalidParameterError("radius must be >= 0")
    v = cx.n_points
    keep = cx.edge_alpha <= r
    e = int(keep.sum())
    f = int(np.count_nonzero(cx.tri_alpha <= r))
    parent = list(range(v))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    b0 = v
    for i, j in cx.edges[keep]:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
            b0 -= 1
    return b0, b0 - (v - e + f)


def betti1_at_radius(cx: AlphaComplex, r: float) -> int:
    """beta1 of the alpha subcomplex at level r; see betti_numbers_at_radius."""
    return betti_numbers_at_radius(cx, r)[1]
