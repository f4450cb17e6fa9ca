"""Finite-depth carpets: Sierpinski, square carpets in rectangle rings, C*-square carpets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (TWO_PI, ClosedCurve, GeometryError, RectChart, Region, circle_curve,
                       rectangle_curve)

MAX_DEPTH = 6
MAX_HOLES = 100_000
SHRINK = 0.8


class CarpetError(ValueError):
    pass


@dataclass
class Carpet:
    """Base region minus a finite list of open axis-parallel squares.

    ``holes`` has rows (cx, cy, side). For ring and log-cylinder kinds the
    distinguished rectangle K lives in ``region.K`` and is kept out of
    ``holes``. Log-cylinder carpets use (log|z|, arg z) coordinates.
    """

    region: Region
    holes: np.ndarray
    depth: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        h = np.asarray(self.holes, dtype=float).reshape(-1, 3)
        order = np.lexsort((h[:, 0], h[:, 1]))
        self.holes = h[order]
        self.holes.setflags(write=False)

    @property
    def K(self):
        return self.region.K

    @property
    def has_K(self) -> bool:
        return self.region.K is not None

    def rects(self) -> np.ndarray:
        """All holes as rows (cx, cy, w, h); K first when present."""
        sq = np.column_stack([self.holes[:, 0], self.holes[:, 1], self.holes[:, 2], self.holes[:, 2]])
        if not self.has_K:
            return sq
        s, w, t, h = self.K
        return np.vstack([[s + w / 2, t + h / 2, w, h], sq])

    @property
    def n_holes(self) -> int:
        return self.holes.shape[0] + (1 if self.has_K else 0)

    def charts(self) -> list[RectChart]:
        return [RectChart(*row) for row in self.rects()]

    def outer_chart(self) -> RectChart:
        x1, y1 = self.region.extent
        return RectChart(x1 / 2, y1 / 2, x1, y1)

    def hole_of(self, z, tol: float = 1e-9) -> np.ndarray:
        """Index (into ``rects``) of the closed hole containing each point, or -1."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        R = self.rects()
        out = np.full(z.shape, -1, dtype=int)
        if R.shape[0] == 0:
            return out
        tree = cKDTree(R[:, :2])
        reach = 0.5 * math.hypot(R[:, 2].max(), R[:, 3].max()) + tol
        cand = tree.query_ball_point(np.column_stack([z.real, z.imag]), reach)
        for n, idx in enumerate(cand):
            for i in idx:
                cx, cy, w, h = R[i]
                if abs(z[n].real - cx) <= w / 2 + tol and abs(z[n].imag - cy) <= h / 2 + tol:
                    out[n] = i
                    break
        return out

    def min_gap(self) -> float:
        return min_gap(self.rects(), self.region)

    def to_json(self) -> dict:
        return {
            "region": self.region.to_json(),
            "K": list(self.K) if self.has_K else None,
            "holes": self.holes.tolist(),
            "depth": int(self.depth),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Carpet":
        region = Region.from_json(data["region"])
        if data.get("K") is not None and region.K is None:
            region = Region(region.kind, region.a, tuple(data["K"]), region.r)
        return cls(region, np.asarray(data["holes"], float).reshape(-1, 3), int(data.get("depth", 0)))


def min_gap(rects: np.ndarray, region: Region | None = None) -> float:
    """Smallest Euclidean distance between closures of distinct rectangles."""
    R = np.asarray(rects, float)
    if R.shape[0] < 2:
        return math.inf

    def gaps(i, j):
        dx = np.abs(R[j, 0] - R[i, 0]) - 0.5 * (R[j, 2] + R[i, 2])
        dy = np.abs(R[j, 1] - R[i, 1]) - 0.5 * (R[j, 3] + R[i, 3])
        return np.hypot(np.maximum(dx, 0), np.maximum(dy, 0))

    centers = R[:, :2]
    _, nn = cKDTree(centers).query(centers, k=min(9, R.shape[0]))
    rows = np.repeat(np.arange(R.shape[0]), nn.shape[1] - 1)
    best = float(gaps(rows, nn[:, 1:].ravel()).min())
    # exact pass: size classes keep the search radii tight
    half = 0.5 * np.hypot(R[:, 2], R[:, 3])
    cls = np.floor(np.log2(half / half.min())).astype(int)
    groups = [np.flatnonzero(cls == c) for c in np.unique(cls)]
    trees = [cKDTree(centers[g]) for g in groups]
    for a, (ga, ta) in enumerate(zip(groups, trees)):
        for gb, tb in zip(groups[a:], trees[a:]):
            reach = half[ga].max() + half[gb].max() + best
            pairs = ta.sparse_distance_matrix(tb, reach, output_type="ndarray")
            if pairs.size == 0:
                continue
            i, j = ga[pairs["i"]], gb[pairs["j"]]
            keep = i != j
            if keep.any():
                best = min(best, float(gaps(i[keep], j[keep]).min()))
    return best


# ---------------------------------------------------------------------------
# generation rules


def sierpinski(depth: int) -> Carpet:
    """Unit square minus the middle-third squares through ``depth`` levels."""
    if depth < 0:
        raise CarpetError("depth must be nonnegative")
    if depth > MAX_DEPTH:
        raise CarpetError("resolution: depth above cap")
    holes = []
    cells = [(0.0, 0.0)]
    side = 1.0
    for _ in range(depth):
        third = side / 3
        nxt = []
        for x, y in cells:
            holes.append((x + 1.5 * third, y + 1.5 * third, third))
            nxt.extend((x + i * third, y + j * third) for i in range(3) for j in range(3) if (i, j) != (1, 1))
        cells, side = nxt, third
    return Carpet(Region("rectangle", a=1.0), np.asarray(holes).reshape(-1, 3), depth, {"rule": "sierpinski"})


def _split_strip(x0, y0, x1, y1):
    """Tile a rectangle into near-square cells along its long side."""
    w, h = x1 - x0, y1 - y0
    if w <= 0 or h <= 0:
        return []
    if w >= h:
        n = max(1, int(round(w / h)))
        xs = np.linspace(x0, x1, n + 1)
        return [(xs[i], y0, xs[i + 1], y1) for i in range(n)]
    n = max(1, int(round(h / w)))
    ys = np.linspace(y0, y1, n + 1)
    return [(x0, ys[i], x1, ys[i + 1]) for i in range(n)]


def fill_cells(cells, depth: int, shrink: float = SHRINK):
    """Place a centred square of side ``shrink * min(w, h)`` in every cell, then
    recurse into the leftover frame split into near-square tiles.

    Every square lies strictly inside its own cell and cells never overlap,
    so square closures are pairwise disjoint with positive gaps.
    """
    holes = []
    for _ in range(depth):
        nxt = []
        for x0, y0, x1, y1 in cells:
            side = shrink * min(x1 - x0, y1 - y0)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            holes.append((cx, cy, side))
            sx0, sx1, sy0, sy1 = cx - side / 2, cx + side / 2, cy - side / 2, cy + side / 2
            for strip in ((x0, y0, x1, sy0), (x0, sy1, x1, y1), (x0, sy0, sx0, sy1), (sx1, sy0, x1, sy1)):
                nxt.extend(_split_strip(*strip))
        cells = nxt
        if len(holes) > MAX_HOLES:
            raise CarpetError("hole-count cap exceeded")
    return holes


def _around_K(x0, y0, x1, y1, K):
    """The eight rectangles of the 3x3 grid cut by the lines of K, minus K."""
    s, w, t, h = K
    xs = (x0, s, s + w, x1)
    ys = (y0, t, t + h, y1)
    out = []
    for j in range(3):
        for i in range(3):
            if (i, j) != (1, 1):
                out.extend(_split_strip(xs[i], ys[j], xs[i + 1], ys[j + 1]))
    return out


def ring_carpet(a: float, K, depth: int, shrink: float = SHRINK) -> Carpet:
    """Square carpet in the rectangle ring [0, a] x [0, 1] minus K = (s, s+w) x (t, t+h).

    ``K`` is given as (s, w, t, h).
    """
    if depth > MAX_DEPTH:
        raise CarpetError("resolution: depth above cap")
    try:
        region = Region("rect-ring", a=a, K=tuple(K))
    except GeometryError as exc:
        raise CarpetError(str(exc)) from exc
    cells = _around_K(0.0, 0.0, a, 1.0, region.K)
    holes = fill_cells(cells, depth, shrink)
    return Carpet(region, np.asarray(holes).reshape(-1, 3), depth, {"rule": "frame-fill", "shrink": shrink})


def cstar_carpet(r: float, K, depth: int, symmetry: int = 1, shrink: float = SHRINK) -> Carpet:
    """C*-square carpet in 1 <= |z| <= r, in (log|z|, arg z) coordinates.

    ``K`` is (log a, log(b/a), alpha, beta - alpha). With ``symmetry`` m > 1
    the rule runs on the sector [0, 2pi/m) containing K and the result is
    replicated; the copies of K then count as ordinary holes, so K must be
    a C*-square in that case.
    """
    if depth > MAX_DEPTH:
        raise CarpetError("resolution: depth above cap")
    if symmetry < 1:
        raise CarpetError("symmetry must be a positive integer")
    L = math.log(r) if r > 1 else 0.0
    sector = TWO_PI / symmetry
    s, w, t, h = (float(v) for v in K)
    if not (1 < math.exp(s) < math.exp(s + w) < r) or not (0 < h < TWO_PI):
        raise CarpetError("need 1 < a < b < r and 0 < beta - alpha < 2pi")
    if not (0 < t and t + h < sector):
        raise CarpetError("K must not wrap around theta = 0 (and must fit one symmetry sector)")
    if symmetry > 1 and not math.isclose(w, h, rel_tol=1e-12):
        raise CarpetError("rotation-symmetric C* carpets need K to be a C*-square")
    region = Region("log-cylinder", r=r, K=(s, w, t, h))
    cells = _around_K(0.0, 0.0, L, sector, region.K)
    holes = fill_cells(cells, depth, shrink)
    base = np.asarray(holes).reshape(-1, 3)
    parts = [base]
    for m in range(1, symmetry):
        shifted = base.copy()
        shifted[:, 1] += m * sector
        parts.append(shifted)
        parts.append([[s + w / 2, t + h / 2 + m * sector, w]])
    return Carpet(region, np.vstack(parts).reshape(-1, 3), depth,
                  {"rule": "frame-fill", "shrink": shrink, "symmetry": symmetry})


def symmetric_carpet(centre_side: float = 1 / 3, outer_side: float = 1 / 6, offset: float = 0.3,
                     centre: bool = True) -> Carpet:
    """Depth-1 carpet in the unit square invariant under the quarter turn about its centre:
    an optional central hole and four holes on the axes."""
    holes = [(0.5 + offset, 0.5, outer_side), (0.5, 0.5 + offset, outer_side),
             (0.5 - offset, 0.5, outer_side), (0.5, 0.5 - offset, outer_side)]
    if centre:
        holes.append((0.5, 0.5, centre_side))
    S = Carpet(Region("rectangle", a=1.0), np.asarray(holes), 1, {"rule": "four-fold"})
    validate(S)
    return S


# ---------------------------------------------------------------------------
# bookkeeping


def carpet_area(S: Carpet) -> float:
    """Region area minus hole areas (Euclidean in log coordinates for C* carpets)."""
    area = S.region.area - float(np.sum(S.holes[:, 2] ** 2))
    if S.has_K:
        area -= S.K[1] * S.K[3]
    return area


def peripheral_circles(S: Carpet, per_side: int = 4, n_circle: int = 64) -> list[ClosedCurve]:
    """Outer boundary first (counterclockwise), then ∂K if present, then holes (clockwise).

    For log-cylinder carpets the curves are returned in the z-plane: the
    outer circle |z| = r, the inner circle |z| = 1, then hole boundaries.
    """
    out = []
    R = S.rects()
    if S.region.kind == "log-cylinder":
        out.append(circle_curve(n_circle, S.region.r))
        out.append(circle_curve(n_circle, 1.0).reversed())
        for cx, cy, w, h in R:
            c = rectangle_curve(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2, per_side)
            out.append(ClosedCurve(np.exp(c.vertices.real + 1j * c.vertices.imag)).reversed())
        return out
    x1, y1 = S.region.extent
    out.append(rectangle_curve(0.0, 0.0, x1, y1, per_side))
    for cx, cy, w, h in R:
        out.append(rectangle_curve(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2, per_side).reversed())
    return out


def validate(S: Carpet) -> None:
    """Check hole closures are inside the region interior and pairwise separated."""
    R = S.rects()
    if R.shape[0] == 0:
        return
    x1, y1 = S.region.extent
    if np.any(R[:, 0] - R[:, 2] / 2 <= 0) or np.any(R[:, 0] + R[:, 2] / 2 >= x1) \
            or np.any(R[:, 1] - R[:, 3] / 2 <= 0) or np.any(R[:, 1] + R[:, 3] / 2 >= y1):
        raise CarpetError("hole closure touches the outer boundary")
    if S.min_gap() <= 0:
        raise CarpetError("hole closures intersect")
