"""Sampled circle homeomorphisms, plane maps, and distortion estimators."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .geometry import TWO_PI, GeometryError, Region, as_complex


class MapError(ValueError):
    pass


_DEDUP = 1e-13


def mod2pi(t):
    """Reduce to [0, 2pi), guarding the rounding case mod(-tiny) == 2pi."""
    t = np.mod(np.asarray(t, dtype=float), TWO_PI)
    return np.where(t >= TWO_PI, 0.0, t)


def _wrap(d):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(d, dtype=float), TWO_PI)


class CircleMap:
    """Piecewise-linear circle homeomorphism, stored through its lift.

    ``angles`` are strictly increasing in [0, 2pi); ``images`` are lift values
    phi(angle). Between samples phi is linear, and
    phi(theta + 2pi) = phi(theta) + 2pi*s with s = +1 (preserve) or -1 (reverse).
    Composition and inversion of such maps are again exact PL maps.
    """

    def __init__(self, angles, images, orientation: str | None = None, _lifted: bool = False):
        angles = np.asarray(angles, dtype=float).ravel()
        images = np.asarray(images, dtype=float).ravel()
        if angles.size != images.size:
            raise MapError("angles and images differ in length")
        if angles.size < 8:
            raise MapError("a circle map needs at least 8 samples")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(images))):
            raise MapError("non-finite samples")
        if np.any(np.diff(angles) <= 0) or angles[0] < 0 or angles[-1] >= TWO_PI:
            raise MapError("angles must be strictly increasing in [0, 2pi)")
        if not _lifted:
            images = _unwrap_images(images, orientation)
        s = 1 if images[-1] >= images[0] else -1
        if orientation is not None and {"preserve": 1, "reverse": -1}[orientation] != s:
            raise MapError("declared orientation does not match the samples")
        steps = np.diff(np.append(images, images[0] + s * TWO_PI)) * s
        if np.any(steps <= 0):
            raise MapError("images are not cyclically strictly monotone")
        shift = 0.0 if _lifted else math.floor(images[0] / TWO_PI) * TWO_PI
        self.angles = angles
        self.images = images - shift
        self.sign = s
        self._xs = np.append(angles, angles[0] + TWO_PI)
        self._ys = np.append(self.images, self.images[0] + s * TWO_PI)
        self.angles.setflags(write=False)
        self.images.setflags(write=False)

    # -- construction ------------------------------------------------------
    @classmethod
    def from_lift(cls, lift: Callable, n: int = 256, offset: float = 0.0) -> "CircleMap":
        t = offset + np.arange(n) * TWO_PI / n
        return cls(t, lift(t), _lifted=True)

    @classmethod
    def identity(cls, n: int = 8) -> "CircleMap":
        return cls.from_lift(lambda t: t, n)

    @classmethod
    def rotation(cls, phi: float, n: int = 8) -> "CircleMap":
        return cls.from_lift(lambda t: t + phi, n)

    @property
    def orientation(self) -> str:
        return "preserve" if self.sign > 0 else "reverse"

    def __len__(self):
        return self.angles.size

    def __repr__(self):
        return f"CircleMap(n={len(self)}, {self.orientation})"

    # -- evaluation ----------------------------------------------------------
    def lift(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.floor((theta - self.angles[0]) / TWO_PI)
        base = theta - k * TWO_PI
        return np.interp(base, self._xs, self._ys) + self.sign * k * TWO_PI

    def __call__(self, theta):
        return np.mod(self.lift(theta), TWO_PI)

    def slope(self, theta):
        """Right derivative of the lift."""
        theta = np.asarray(theta, dtype=float)
        base = self.angles[0] + np.mod(theta - self.angles[0], TWO_PI)
        idx = np.clip(np.searchsorted(self._xs, base, side="right") - 1, 0, len(self) - 1)
        return (self._ys[idx + 1] - self._ys[idx]) / (self._xs[idx + 1] - self._xs[idx])

    def on_points(self, z):
        """The map as a self-map of the unit circle in the plane."""
        return np.exp(1j * self.lift(np.angle(as_complex(z))))

    # -- algebra -------------------------------------------------------------
    def inverse(self) -> "CircleMap":
        y, x = self.images, self.angles
        k = np.floor(y / TWO_PI)
        new_angles = y - k * TWO_PI
        wrap = new_angles >= TWO_PI
        new_angles[wrap] -= TWO_PI
        k[wrap] += 1
        new_images = x - self.sign * k * TWO_PI
        order = np.argsort(new_angles)
        return CircleMap(new_angles[order], new_images[order], _lifted=True)

    def compose(self, inner: "CircleMap") -> "CircleMap":
        """self o inner, exact on the union of breakpoints."""
        pulled = mod2pi(inner.inverse().lift(self.angles))
        bps = np.sort(np.concatenate([inner.angles, pulled]))
        keep = np.concatenate([[True], np.diff(bps) > _DEDUP])
        bps = bps[keep]
        if TWO_PI - bps[-1] + bps[0] <= _DEDUP:
            bps = bps[:-1]
        return CircleMap(bps, self.lift(inner.lift(bps)), _lifted=True)

    def __matmul__(self, other):
        return self.compose(other)

    def iterate(self, n: int) -> "CircleMap":
        if n < 0:
            return self.inverse().iterate(-n)
        if n == 0:
            return CircleMap.identity(len(self))
        out = self
        for _ in range(n - 1):
            out = self.compose(out)
        return out

    # -- io ------------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["angle", "image"])
        for a, b in zip(self.angles, np.mod(self.images, TWO_PI)):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, orientation: str | None = None) -> "CircleMap":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["angle", "image"]:
            raise MapError("CSV header 'angle,image' required")
        data = np.array([[float(a), float(b)] for a, b in rows[1:] if a.strip()])
        return cls(data[:, 0], data[:, 1], orientation=orientation)


def _unwrap_images(images, orientation):
    """Lift images given modulo 2pi into a monotone sequence."""
    d = np.diff(np.mod(images, TWO_PI))
    if orientation is None:
        pos = np.sum(np.mod(d, TWO_PI) < np.pi)
        orientation = "preserve" if pos >= d.size / 2 else "reverse"
    out = np.empty_like(images)
    out[0] = np.mod(images[0], TWO_PI)
    if orientation == "preserve":
        steps = np.mod(d, TWO_PI)
    else:
        steps = -np.mod(-d, TWO_PI)
    out[1:] = out[0] + np.cumsum(steps)
    return out


def orientation_preserving(f: CircleMap) -> bool:
    """Compare the cyclic order of the images with that of the angles."""
    img = np.mod(f.images, TWO_PI)
    if img.size < 3:
        raise MapError("need at least 3 samples")
    srt = np.sort(img)
    if np.any(np.diff(srt) <= 0) or (srt[0] + TWO_PI - srt[-1]) <= 0:
        raise MapError("non-injective")
    descents = int(np.sum(np.roll(img, -1) < img))
    if descents == 1:
        return True
    if descents == img.size - 1:
        return False
    raise MapError("non-injective")


# ---------------------------------------------------------------------------
# functional plane maps


class PlaneMap:
    """A plane map given by an exact evaluator on complex arrays.

    ``inverse`` is optional; compositions keep exactness, and ``sample``
    produces a lattice ``GridMap`` for export and dilatation estimates.
    """

    def __init__(self, func: Callable, inverse: Callable | None = None, region: Region | None = None,
                 name: str = "map"):
        self._func = func
        self._inverse = inverse
        self.region = region
        self.name = name

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self._func(z)

    def has_inverse(self) -> bool:
        return self._inverse is not None

    def inverse(self) -> "PlaneMap":
        if self._inverse is None:
            raise MapError("no inverse available")
        return PlaneMap(self._inverse, self._func, self.region, f"{self.name}^-1")

    def compose(self, inner: "PlaneMap") -> "PlaneMap":
        inv = None
        if self.has_inverse() and inner.has_inverse():
            inv = lambda w: inner._inverse(self._inverse(w))  # noqa: E731
        return PlaneMap(lambda z: self._func(inner._func(z)), inv, inner.region, f"{self.name}.{inner.name}")

    def iterate(self, n: int) -> "PlaneMap":
        if n < 0:
            return self.inverse().iterate(-n)

        def run(z, fn=self._func):
            for _ in range(n):
                z = fn(z)
            return z

        def run_inv(w, fn=self._inverse):
            for _ in range(n):
                w = fn(w)
            return w

        return PlaneMap(run, run_inv if self.has_inverse() else None, self.region, f"{self.name}^{n}")

    def sample(self, n: int, window=(-1.0, 1.0, -1.0, 1.0), mask: Callable | None = None) -> "GridMap":
        x0, x1, y0, y1 = window
        xs = np.linspace(x0, x1, n)
        ys = np.linspace(y0, y1, n)
        Z = xs[None, :] + 1j * ys[:, None]
        vals = np.full(Z.shape, np.nan + 1j * np.nan)
        ok = np.ones(Z.shape, bool) if mask is None else mask(Z)
        vals[ok] = self(Z[ok])
        return GridMap(xs, ys, vals, region=self.region)


def identity_map(region=None) -> PlaneMap:
    return PlaneMap(lambda z: z.copy(), lambda w: w.copy(), region, "id")


def rotation_map(phi: float, center: complex = 0.0) -> PlaneMap:
    e, c = np.exp(1j * phi), complex(center)
    return PlaneMap(lambda z: c + e * (z - c), lambda w: c + (w - c) / e, None, f"rot({phi:.4g})")


# ---------------------------------------------------------------------------
# lattice maps


@dataclass
class GridMap:
    """Values of a plane map on a regular lattice, bilinear between nodes.

    ``values[i, j]`` is the image of ``xs[j] + 1j*ys[i]``; NaN marks nodes
    outside the domain.
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    region: Region | None = None

    def __post_init__(self):
        self.xs = np.asarray(self.xs, float)
        self.ys = np.asarray(self.ys, float)
        self.values = np.asarray(self.values, complex)
        if self.values.shape != (self.ys.size, self.xs.size):
            raise MapError("value array does not match the lattice")

    @property
    def delta(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def nodes(self) -> np.ndarray:
        return self.xs[None, :] + 1j * self.ys[:, None]

    def _locate(self, z):
        z = np.asarray(z, dtype=complex)
        fx = (z.real - self.xs[0]) / (self.xs[1] - self.xs[0])
        fy = (z.imag - self.ys[0]) / (self.ys[1] - self.ys[0])
        eps = 1e-9
        if np.any((fx < -eps) | (fx > self.xs.size - 1 + eps) | (fy < -eps) | (fy > self.ys.size - 1 + eps)):
            raise MapError("out of domain")
        j = np.clip(np.floor(fx).astype(int), 0, self.xs.size - 2)
        i = np.clip(np.floor(fy).astype(int), 0, self.ys.size - 2)
        return i, j, fx - j, fy - i

    def __call__(self, z):
        i, j, u, v = self._locate(z)
        V = self.values
        out = ((1 - u) * (1 - v) * V[i, j] + u * (1 - v) * V[i, j + 1]
               + (1 - u) * v * V[i + 1, j] + u * v * V[i + 1, j + 1])
        if np.any(~np.isfinite(out)):
            raise MapError("out of domain")
        return out

    def compose(self, inner: "GridMap") -> "GridMap":
        """self o inner, sampled on inner's lattice."""
        vals = np.full(inner.values.shape, np.nan + 1j * np.nan)
        ok = np.isfinite(inner.values)
        vals[ok] = self(inner.values[ok])
        return GridMap(inner.xs, inner.ys, vals, inner.region)

    def iterate(self, n: int) -> "GridMap":
        out = GridMap(self.xs, self.ys, self.nodes.astype(complex), self.region)
        out.values[~np.isfinite(self.values)] = np.nan
        for _ in range(n):
            out = self.compose(out)
        return out

    def invert_points(self, w, max_iter: int = 20, tol: float = 1e-10):
        """Preimages of ``w``: nearest-node seed, then a chord (fixed-Jacobian) iteration."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        nodes = self.nodes.ravel()
        vals = self.values.ravel()
        ok = np.isfinite(vals)
        from scipy.spatial import cKDTree

        tree = cKDTree(np.column_stack([vals[ok].real, vals[ok].imag]))
        _, idx = tree.query(np.column_stack([w.real, w.imag]))
        z = nodes[ok][idx].copy()
        h = self.delta
        for _ in range(max_iter):
            fz = self(z)
            # chord Jacobian from the lattice cell around z
            ex = self(np.clip(z.real + 0.5 * h, self.xs[0], self.xs[-1]) + 1j * z.imag) - \
                self(np.clip(z.real - 0.5 * h, self.xs[0], self.xs[-1]) + 1j * z.imag)
            ey = self(z.real + 1j * np.clip(z.imag + 0.5 * h, self.ys[0], self.ys[-1])) - \
                self(z.real + 1j * np.clip(z.imag - 0.5 * h, self.ys[0], self.ys[-1]))
            a, c = ex.real / h, ex.imag / h
            b, d = ey.real / h, ey.imag / h
            det = a * d - b * c
            r = w - fz
            dx = (d * r.real - b * r.imag) / det
            dy = (-c * r.real + a * r.imag) / det
            z = np.clip(z.real + dx, self.xs[0], self.xs[-1]) + 1j * np.clip(z.imag + dy, self.ys[0], self.ys[-1])
            if np.max(np.abs(w - self(z))) <= tol * h:
                break
        else:
            if np.max(np.abs(w - self(z))) > tol * h:
                raise MapError("inversion did not converge")
        return z

    def invert(self) -> "GridMap":
        vals = np.full(self.values.shape, np.nan + 1j * np.nan)
        Z = self.nodes
        lo = np.nanmin(self.values.real), np.nanmax(self.values.real)
        hi = np.nanmin(self.values.imag), np.nanmax(self.values.imag)
        inside = (Z.real >= lo[0]) & (Z.real <= lo[1]) & (Z.imag >= hi[0]) & (Z.imag <= hi[1])
        if np.all(np.isfinite(self.values)) and np.allclose(self.values, Z, atol=0, rtol=0):
            return GridMap(self.xs, self.ys, Z.copy(), self.region)
        vals[inside] = self.invert_points(Z[inside])
        return GridMap(self.xs, self.ys, vals, self.region)

    def to_json(self) -> dict:
        vals = [[None, None] if not np.isfinite(v) else [float(v.real), float(v.imag)]
                for v in self.values.ravel()]
        return {
            "region": self.region.to_json() if self.region is not None else None,
            "delta": self.delta,
            "origin": [float(self.xs[0]), float(self.ys[0])],
            "shape": [int(self.ys.size), int(self.xs.size)],
            "values": vals,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridMap":
        ny, nx = data["shape"]
        x0, y0 = data["origin"]
        d = data["delta"]
        arr = np.array([[np.nan, np.nan] if v[0] is None else v for v in data["values"]], float)
        vals = (arr[:, 0] + 1j * arr[:, 1]).reshape(ny, nx)
        region = Region.from_json(data["region"]) if data.get("region") else None
        return cls(x0 + d * np.arange(nx), y0 + d * np.arange(ny), vals, region)


# ---------------------------------------------------------------------------
# estimators

_COMPASS = np.array([1, 1 + 1j, 1j, -1 + 1j, -1, -1 - 1j, -1j, 1 - 1j])


def _node_dilatation(vals: np.ndarray) -> np.ndarray:
    """Per-node 8-direction max/min stretch; NaN where any neighbour is missing."""
    ny, nx = vals.shape
    out = np.full((ny, nx), np.nan)
    c = vals[1:-1, 1:-1]
    stretches = []
    for e in _COMPASS:
        di, dj = int(e.imag), int(e.real)
        nb = vals[1 + di:ny - 1 + di, 1 + dj:nx - 1 + dj]
        stretches.append(np.abs(nb - c) / abs(e))
    s = np.stack(stretches)
    with np.errstate(invalid="ignore", divide="ignore"):
        smin = s.min(axis=0)
        ratio = s.max(axis=0) / smin
    if np.any(smin[np.isfinite(smin)] == 0):
        raise MapError("collapsed node")
    out[1:-1, 1:-1] = ratio
    return out


def dilatation_field(f, n: int = 64, window=(-1.0, 1.0, -1.0, 1.0), mask=None) -> GridMap | np.ndarray:
    grid = f if isinstance(f, GridMap) else f.sample(n, window, mask)
    return _node_dilatation(grid.values)


def dilatation_estimate(f, n: int = 64, window=(-1.0, 1.0, -1.0, 1.0), mask=None) -> float:
    """Max over interior lattice nodes of the 8-direction stretch ratio."""
    field_ = dilatation_field(f, n, window, mask)
    if not np.any(np.isfinite(field_)):
        raise MapError("no interior nodes")
    return float(np.nanmax(field_))


def local_dilatation(f, z, h: float) -> np.ndarray:
    """8-direction stretch ratio of f at the points z with step h."""
    z = np.asarray(z, dtype=complex)
    c = f(z)
    s = np.stack([np.abs(f(z + h * e) - c) / (h * abs(e)) for e in _COMPASS])
    smin = s.min(axis=0)
    if np.any(smin == 0):
        raise MapError("collapsed node")
    return s.max(axis=0) / smin


def _as_point_map(f) -> Callable:
    if isinstance(f, CircleMap):
        return f.on_points
    return f


def _triple_distances(f, triples):
    T = np.asarray(triples, dtype=complex)
    g = _as_point_map(f)
    x, a, b = T[:, 0], T[:, 1], T[:, 2]
    fx, fa, fb = g(x), g(a), g(b)
    return np.abs(x - a), np.abs(x - b), np.abs(fx - fa), np.abs(fx - fb)


def weak_qs_constant(f, triples) -> float:
    """max d(fx, fa) / d(fx, fb) over triples with d(x, a) <= d(x, b)."""
    dxa, dxb, dfa, dfb = _triple_distances(f, triples)
    if np.any(dxb == 0):
        raise MapError("b coincides with x")
    if np.any(dxa > dxb * (1 + 1e-12)):
        raise MapError("triples must satisfy d(x,a) <= d(x,b)")
    if np.any(dfb == 0):
        raise MapError("non-injective sample")
    return float(max(1.0, np.max(dfa / dfb)))


def qs_eta_profile(f, t_grid, triples):
    """Empirical eta: for each t, the max image ratio over triples with ratio <= t."""
    dxa, dxb, dfa, dfb = _triple_distances(f, triples)
    if np.any(dfb == 0):
        raise MapError("non-injective sample")
    ratio, img = dxa / dxb, dfa / dfb
    order = np.argsort(ratio)
    ratio, running = ratio[order], np.maximum.accumulate(img[order])
    out = []
    for t in np.asarray(t_grid, float):
        k = np.searchsorted(ratio, t, side="right")
        if k > 0:
            out.append((float(t), float(running[k - 1])))
    return out


ETA_BUCKETS = (1 / 8, 1 / 4, 1 / 2, 1.0, 2.0, 4.0, 8.0)


def circle_triples(n: int = 4096, samples=None, seed: int = 0, admissible: bool = True) -> np.ndarray:
    """Quasi-random triples on S^1 plus all adjacent-sample triples.

    With ``admissible`` each triple is ordered so that d(x, a) <= d(x, b).
    """
    pts = qmc.Halton(d=3, seed=seed).random(n) * TWO_PI
    T = [np.exp(1j * pts)]
    if samples is not None:
        s = np.asarray(samples, float)
        T.append(np.exp(1j * np.column_stack([s, np.roll(s, -1), np.roll(s, 1)])))
    T = np.concatenate(T)
    x, a, b = T[:, 0], T[:, 1], T[:, 2]
    keep = (np.abs(x - b) > 0) & (np.abs(x - a) > 0)
    T = T[keep]
    if admissible:
        swap = np.abs(T[:, 0] - T[:, 1]) > np.abs(T[:, 0] - T[:, 2])
        T[swap, 1], T[swap, 2] = T[swap, 2].copy(), T[swap, 1].copy()
    return T


def is_periodic(f, k: int, tol: float = 1e-9, probes=None):
    """Return (ok, residual) for f^k against the identity."""
    if k < 1:
        raise MapError("k must be positive")
    if isinstance(f, CircleMap):
        theta = np.concatenate([f.angles, np.linspace(0, TWO_PI, 1024, endpoint=False)]) if probes is None \
            else np.asarray(probes, float)
        x = theta.copy()
        for _ in range(k):
            x = f.lift(x)
        res = float(np.max(np.abs(_wrap(x - theta))))
    else:
        if probes is None:
            raise MapError("plane maps need explicit probes")
        z0 = np.asarray(probes, complex)
        z = z0.copy()
        for _ in range(k):
            z = f(z)
        res = float(np.max(np.abs(z - z0)))
    return res <= tol, res


def conjugator(n: int = 64, amp: float = 0.3, seed: int | None = None) -> CircleMap:
    """PL circle homeomorphism t + sum of small sines (random phases when seeded)."""
    if seed is None:
        return CircleMap.from_lift(lambda t: t + amp * np.sin(t), n)
    rng = np.random.default_rng(seed)
    modes = rng.integers(1, 4, size=3)
    phases = rng.uniform(0, TWO_PI, size=3)
    scale = amp / np.sum(modes)

    def lift(t):
        return t + scale * sum(np.sin(m * t + p) for m, p in zip(modes, phases))

    return CircleMap.from_lift(lift, n)


def conjugated_rotation(k: int, m: int = 1, n: int = 64, amp: float = 0.3, seed: int | None = None) -> CircleMap:
    """h^-1 o (rotation by 2pi m/k) o h: exactly k-periodic up to rounding."""
    h = conjugator(n, amp, seed)
    return h.inverse() @ CircleMap.rotation(TWO_PI * m / k, n) @ h


def minimal_period(f: CircleMap, k: int, tol: float = 1e-9) -> int:
    for d in range(1, k + 1):
        if k % d == 0 and is_periodic(f, d, tol)[0]:
            return d
    raise MapError(f"map is not {k}-periodic")


def compose(f, g):
    """f o g for CircleMap, PlaneMap or GridMap operands."""
    return f.compose(g)


def invert(f):
    return f.inverse() if hasattr(f, "inverse") else f.invert()


def iterate(f, n: int):
    return f.iterate(n)


# ---------------------------------------------------------------------------
# carpet maps


@dataclass
class CarpetMap:
    """A self-map of a finite carpet described through its peripheral circles.

    ``perm[i]`` is the index of the image of hole ``i``; ``hole_maps[i]`` is
    the boundary correspondence in chart angles (chart of hole i to chart of
    hole perm[i]). ``outer`` is the outer boundary map in the outer chart;
    ``inner`` is used for log-cylinder carpets (inner circle, in theta).
    ``interior`` optionally evaluates the map on the carpet itself.
    """

    perm: np.ndarray
    hole_maps: list
    outer: CircleMap | None = None
    inner: CircleMap | None = None
    interior: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=int)
        if self.perm.size != len(self.hole_maps):
            raise MapError("one boundary map per hole required")
        if self.perm.size and not np.array_equal(np.sort(self.perm), np.arange(self.perm.size)):
            raise MapError("hole assignment is not a bijection")

    @classmethod
    def identity(cls, n_holes: int, n: int = 8, with_inner: bool = False) -> "CarpetMap":
        ident = CircleMap.identity(n)
        return cls(np.arange(n_holes), [ident] * n_holes, ident, ident if with_inner else None,
                   interior=lambda z: np.asarray(z, complex).copy())

    def to_json(self) -> dict:
        def cm(m):
            return None if m is None else {"angles": m.angles.tolist(), "images": m.images.tolist()}

        return {"perm": self.perm.tolist(), "hole_maps": [cm(m) for m in self.hole_maps],
                "outer": cm(self.outer), "inner": cm(self.inner), "meta": self.meta}

    @classmethod
    def from_json(cls, data: dict) -> "CarpetMap":
        def cm(d):
            return None if d is None else CircleMap(d["angles"], d["images"], _lifted=True)

        return cls(data["perm"], [cm(d) for d in data["hole_maps"]], cm(data.get("outer")),
                   cm(data.get("inner")), None, data.get("meta", {}))
