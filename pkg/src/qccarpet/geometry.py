"""Planar primitives: points, closed polylines, arcs, regions and charts.

Points are carried as complex numbers throughout the package; the helpers
here accept either complex arrays or ``(n, 2)`` real arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
MAX_QC_VERTICES = 4096


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class PointC:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError("non-finite point")

    def __complex__(self):
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z) -> "PointC":
        z = complex(z)
        return cls(z.real, z.imag)


def as_complex(points) -> np.ndarray:
    """Coerce points (complex, PointC, pairs or an (n, 2) array) to a complex array."""
    if isinstance(points, np.ndarray) and np.iscomplexobj(points):
        return points.astype(complex, copy=False)
    if isinstance(points, (complex, float, int, PointC)):
        return np.asarray([complex(points)])
    pts = list(points) if not isinstance(points, np.ndarray) else points
    if len(pts) == 0:
        return np.zeros(0, dtype=complex)
    if isinstance(pts, np.ndarray) and pts.ndim == 2 and pts.shape[1] == 2:
        return pts[:, 0] + 1j * pts[:, 1]
    first = pts[0]
    if isinstance(first, PointC) or np.iscomplexobj(np.asarray(first)) or np.ndim(first) == 0:
        return np.asarray([complex(p) for p in pts])
    arr = np.asarray(pts, dtype=float)
    return arr[:, 0] + 1j * arr[:, 1]


def diameter(points) -> float:
    z = as_complex(points)
    if z.size == 0:
        raise GeometryError("empty set")
    if z.size == 1:
        return 0.0
    best = 0.0
    # chunked brute force keeps memory at O(chunk * n)
    chunk = max(1, 4_000_000 // z.size)
    for start in range(0, z.size, chunk):
        block = z[start:start + chunk]
        best = max(best, float(np.abs(block[:, None] - z[None, :]).max()))
    return best


def signed_area(vertices) -> float:
    z = as_complex(vertices)
    x, y = z.real, z.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def signed_area_orientation(curve) -> str:
    verts = curve.vertices if isinstance(curve, ClosedCurve) else as_complex(curve)
    area = signed_area(verts)
    if area == 0.0 or not math.isfinite(area):
        raise GeometryError("degenerate curve")
    return "counterclockwise" if area > 0 else "clockwise"


def _segments_cross(p1, p2, q1, q2):
    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def is_simple(vertices) -> bool:
    """Proper-crossing test over all non-adjacent edge pairs."""
    z = as_complex(vertices)
    n = z.size
    a, b = z, np.roll(z, -1)
    for i in range(n - 2):
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if js.size == 0:
            continue
        if np.any(_segments_cross(a[i], b[i], a[js], b[js])):
            return False
    return True


@dataclass(frozen=True)
class ClosedCurve:
    """Closed polyline; the last vertex is implicitly joined to the first."""

    vertices: np.ndarray
    orientation: str = field(default="")

    def __post_init__(self):
        z = as_complex(self.vertices)
        if z.size < 8:
            raise GeometryError("a closed curve needs at least 8 vertices")
        if not np.all(np.isfinite(z)):
            raise GeometryError("non-finite vertex")
        step = np.abs(np.roll(z, -1) - z)
        if np.any(step == 0.0):
            raise GeometryError("degenerate curve")
        object.__setattr__(self, "vertices", z)
        actual = signed_area_orientation(z)
        if self.orientation and _norm_orientation(self.orientation) != actual:
            raise GeometryError(f"declared orientation {self.orientation!r} does not match {actual}")
        object.__setattr__(self, "orientation", actual)

    def __len__(self):
        return self.vertices.size

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(self.vertices[::-1].copy())

    def to_json(self) -> dict:
        return {
            "vertices": [[float(v.real), float(v.imag)] for v in self.vertices],
            "orientation": "ccw" if self.orientation == "counterclockwise" else "cw",
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClosedCurve":
        return cls(np.asarray(data["vertices"], dtype=float), data.get("orientation", ""))


def _norm_orientation(label: str) -> str:
    label = label.lower()
    if label in ("ccw", "counterclockwise"):
        return "counterclockwise"
    if label in ("cw", "clockwise"):
        return "clockwise"
    raise GeometryError(f"unknown orientation {label!r}")


@dataclass(frozen=True)
class Arc:
    """Sub-polyline of a closed curve from ``start`` to ``end`` (inclusive)."""

    curve: ClosedCurve
    start: int
    end: int
    forward: bool = True

    def __post_init__(self):
        n = len(self.curve)
        if self.start % n == self.end % n:
            raise GeometryError("arc endpoints coincide")

    def indices(self) -> np.ndarray:
        n = len(self.curve)
        s, e = self.start % n, self.end % n
        if self.forward:
            return np.arange(s, s + (e - s) % n + 1) % n
        return np.arange(s, s - (s - e) % n - 1, -1) % n

    def points(self) -> np.ndarray:
        return self.curve.vertices[self.indices()]

    def diameter(self) -> float:
        return diameter(self.points())


def circle_curve(n: int, radius: float = 1.0, center: complex = 0.0) -> ClosedCurve:
    t = np.arange(n) * TWO_PI / n
    return ClosedCurve(center + radius * np.exp(1j * t))


def rectangle_curve(x0, y0, x1, y1, per_side: int = 4) -> ClosedCurve:
    """Counterclockwise rectangle boundary with ``per_side`` vertices per side."""
    s = np.arange(per_side) / per_side
    bottom = (x0 + (x1 - x0) * s) + 1j * y0
    right = x1 + 1j * (y0 + (y1 - y0) * s)
    top = (x1 - (x1 - x0) * s) + 1j * y1
    left = x0 + 1j * (y1 - (y1 - y0) * s)
    return ClosedCurve(np.concatenate([bottom, right, top, left]))


def quasicircle_constant(curve: ClosedCurve, max_vertices: int = MAX_QC_VERTICES) -> float:
    """Lower estimate of the quasicircle constant at the curve's vertex resolution.

    For every vertex pair the two complementary sub-polylines are formed and
    ``min(diam) / chord`` is maximised. Arc diameters come from a dynamic
    program over the doubled vertex list, O(n^2) time and memory.
    """
    z = curve.vertices if isinstance(curve, ClosedCurve) else ClosedCurve(curve).vertices
    if z.size > max_vertices:
        stride = math.ceil(z.size / max_vertices)
        z = z[::stride]
    n = z.size
    zz = np.concatenate([z, z])
    # arc_diam[p, d] = diam of zz[p .. p+d], p < n, 0 <= d <= n
    arc_diam = np.zeros((n, n + 1))
    # reach[q] = max_{p <= m < q} |zz[q] - zz[m]| for the current p
    reach = np.zeros(2 * n)
    for p in range(2 * n - 1, -1, -1):
        hi = min(2 * n, p + n + 1)
        reach[p + 1:hi] = np.maximum(reach[p + 1:hi], np.abs(zz[p + 1:hi] - zz[p]))
        if p < n:
            arc_diam[p, 1:] = np.maximum.accumulate(reach[p + 1:p + n + 1])
    best = 0.0
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        chord = np.abs(z[js] - z[i])
        if np.any(chord == 0):
            raise GeometryError("degenerate curve")
        alpha = arc_diam[i, js - i]
        beta = arc_diam[js, n - (js - i)]
        best = max(best, float(np.max(np.minimum(alpha, beta) / chord)))
    return best


# ---------------------------------------------------------------------------
# regions


REGION_KINDS = ("rectangle", "rect-ring", "log-cylinder")


@dataclass(frozen=True)
class Region:
    """Base region of a carpet.

    ``rectangle``: [0, a] x [0, 1].  ``rect-ring``: the rectangle minus the
    open rectangle K = (s, s+w) x (t, t+h).  ``log-cylinder``: the annulus
    1 <= |z| <= r stored in (log|z|, arg z) coordinates as [0, log r] x [0, 2pi),
    optionally minus a C*-rectangle K given in the same coordinates.
    """

    kind: str
    a: float = 1.0
    K: tuple | None = None  # (s, w, t, h)
    r: float | None = None

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise GeometryError(f"unknown region kind {self.kind!r}")
        if self.kind == "log-cylinder":
            if self.r is None or not self.r > 1:
                raise GeometryError("log-cylinder needs r > 1")
            object.__setattr__(self, "a", math.log(self.r))
        elif not self.a > 0:
            raise GeometryError("rectangle width must be positive")
        if self.kind == "rect-ring" and self.K is None:
            raise GeometryError("rect-ring needs K")
        if self.K is not None:
            s, w, t, h = (float(v) for v in self.K)
            object.__setattr__(self, "K", (s, w, t, h))
            if not (w > 0 and h > 0):
                raise GeometryError("K sides must be positive")
            x1, y1 = self.extent
            if not (0 < s and s + w < x1 and 0 < t and t + h < y1):
                raise GeometryError("closure of K must lie in the interior of R")

    @property
    def extent(self) -> tuple[float, float]:
        if self.kind == "log-cylinder":
            return math.log(self.r), TWO_PI
        return self.a, 1.0

    @property
    def area(self) -> float:
        x1, y1 = self.extent
        return x1 * y1

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "log-cylinder":
            out["r"] = self.r
        else:
            out["a"] = self.a
        if self.K is not None:
            out["K"] = list(self.K)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Region":
        K = data.get("K")
        return cls(kind=data["kind"], a=data.get("a", 1.0), K=tuple(K) if K else None, r=data.get("r"))


def rectangle(a: float) -> Region:
    return Region("rectangle", a=a)


def rect_ring(a: float, s: float, w: float, t: float, h: float) -> Region:
    return Region("rect-ring", a=a, K=(s, w, t, h))


def log_cylinder(r: float, K=None) -> Region:
    return Region("log-cylinder", r=r, K=K)


# ---------------------------------------------------------------------------
# charts: square <-> disk (shell map) and rectangle charts


def square_to_disk(z):
    """Shell map of [-1, 1]^2 onto the closed unit disk.

    The square of half-side s goes to the circle of radius s, and each side
    goes affinely (in its own coordinate) onto a quarter circle, with the
    corners at odd multiples of pi/4. Bilipschitz, and piecewise-linear data
    on the sides stays piecewise linear in boundary angle.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    s = np.maximum(np.abs(x), np.abs(y))
    safe = np.where(s > 0, s, 1.0)
    bx, by = x / safe, y / safe
    q = np.pi / 4
    tau = np.where(bx >= np.abs(by), q * by,
          np.where(by >= np.abs(bx), 2 * q - q * bx,
          np.where(-bx >= np.abs(by), 4 * q - q * by, 6 * q + q * bx)))
    return np.where(s > 0, s * np.exp(1j * tau), 0.0)


def disk_to_square(w):
    w = np.asarray(w, dtype=complex)
    s = np.minimum(np.abs(w), 1.0)
    tau = np.mod(np.angle(w) + np.pi / 4, TWO_PI)  # 0 at the corner (1, -1)
    side = np.minimum(np.floor(tau / (np.pi / 2)), 3)
    t = tau - side * (np.pi / 2)
    u = t * (4 / np.pi) - 1.0  # side coordinate in [-1, 1]
    bx = np.select([side == 0, side == 1, side == 2], [1.0, -u, -1.0], u)
    by = np.select([side == 0, side == 1, side == 2], [u, 1.0, -u], -1.0)
    return s * bx + 1j * s * by


@dataclass(frozen=True)
class RectChart:
    """Orientation-preserving chart of the closed rectangle onto the unit disk.

    Affine onto [-1, 1]^2, then the shell square-to-disk map. For a
    square hole the chart intertwines a quarter turn about the hole centre
    with a quarter turn of the disk.
    """

    cx: float
    cy: float
    w: float
    h: float

    @property
    def center(self) -> complex:
        return complex(self.cx, self.cy)

    def to_square(self, z):
        z = np.asarray(z, dtype=complex) - self.center
        return (2.0 * z.real / self.w) + 1j * (2.0 * z.imag / self.h)

    def from_square(self, q):
        q = np.asarray(q, dtype=complex)
        return self.center + 0.5 * self.w * q.real + 0.5j * self.h * q.imag

    def to_disk(self, z):
        return square_to_disk(self.to_square(z))

    def from_disk(self, w):
        return self.from_square(disk_to_square(w))

    def boundary_angle(self, z):
        return np.mod(np.angle(self.to_disk(z)), TWO_PI)

    def boundary_point(self, theta):
        return self.from_disk(np.exp(1j * np.asarray(theta, dtype=float)))

    def contains(self, z, tol: float = 0.0):
        z = np.asarray(z, dtype=complex) - self.center
        return (np.abs(z.real) <= 0.5 * self.w + tol) & (np.abs(z.imag) <= 0.5 * self.h + tol)


def point_in_polygon(points, vertices) -> np.ndarray:
    """Even-odd rule; boundary points are unspecified."""
    p = as_complex(points)
    v = as_complex(vertices)
    inside = np.zeros(p.shape, dtype=bool)
    x, y = p.real, p.imag
    vx, vy = v.real, v.imag
    j = v.size - 1
    for i in range(v.size):
        crosses = (vy[i] > y) != (vy[j] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = vx[i] + (y - vy[i]) * (vx[j] - vx[i]) / (vy[j] - vy[i])
        inside ^= crosses & (x < xint)
        j = i
    return inside


def hausdorff(a, b) -> float:
    a, b = as_complex(a), as_complex(b)
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
