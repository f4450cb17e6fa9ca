"""Reflection tower: from a map of A_r fixing both boundary circles to the disk and the plane."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import TWO_PI, PointC
from ..maps import MapError, PlaneMap

BOUNDARY_TOL = 1e-9
WINDOW = 2.0


class TowerError(ValueError):
    pass


def reflect(z, r: float):
    """Reflection through |z| = r: z -> r^2 / conj(z)."""
    if isinstance(z, PointC):
        return PointC.from_complex(reflect(complex(z), r))
    za = np.asarray(z, dtype=complex)
    if np.any(za == 0):
        raise TowerError("pole: reflection undefined at 0")
    out = r * r / np.conj(za)
    return complex(out) if np.ndim(z) == 0 and not isinstance(z, np.ndarray) else out


def _check_circle(f: PlaneMap, radius: float, n: int = 256):
    z = radius * np.exp(1j * np.arange(n) * TWO_PI / n)
    dev = np.max(np.abs(np.abs(f(z)) - radius))
    if dev > BOUNDARY_TOL * max(radius, 1e-300) * 10:
        raise TowerError(f"boundary not preserved: |f| deviates from {radius:g} by {dev:.3g}")


def default_depth(r: float, spacing: float = 4.0 / 256) -> int:
    """Doublings until the innermost ring is below the grid spacing."""
    return max(1, math.ceil(math.log2(math.log(spacing) / math.log(r))))


def _ring_level(rad: np.ndarray, r: float) -> np.ndarray:
    """Smallest m >= 1 with |z| >= r^(2^m), for 0 < |z| < r."""
    with np.errstate(divide="ignore"):
        m = np.ceil(np.log2(np.log(rad) / math.log(r)))
    return np.maximum(m, 1).astype(int)


def _tower_eval(f0, r: float, z: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape, dtype=complex)
    rad = np.abs(z)
    outer = rad >= r
    if outer.any():
        out[outer] = f0(z[outer])
    inner = (~outer) & (rad > 0)
    if not inner.any():
        return out
    idx = np.flatnonzero(inner)
    lev = _ring_level(rad[idx], r)
    for m in np.unique(lev):
        sel = idx[lev == m]
        rho = r ** (2.0 ** (m - 1))
        w = rho * rho / np.conj(z[sel])
        out[sel] = rho * rho / np.conj(_tower_eval(f0, r, w))
    return out


@dataclass
class ReflectionTower:
    """f_inf on the closed disk built by repeated reflection of f0 on A_r.

    The level-m map is f_inf restricted to A_{r^(2^m)}; consecutive levels
    share one evaluator, so they agree on their common annulus by construction.
    """

    f0: PlaneMap
    r: float
    depth: int
    f_inf: PlaneMap
    manifest: dict = field(default_factory=dict)

    def level(self, m: int) -> PlaneMap:
        if not 0 <= m <= self.depth:
            raise TowerError("level outside the tower")
        inner = self.r ** (2.0 ** m)
        fi = self.f_inf

        def run(z):
            z = np.asarray(z, dtype=complex)
            if np.any(np.abs(z) < inner * (1 - 1e-12)):
                raise MapError("out of domain: point inside the level annulus")
            return fi(z)

        return PlaneMap(run, name=f"f_{m}")

    def ring_bounds(self, m: int) -> tuple[float, float]:
        """Radii of ring m: A_r for m = 0, else A_{r^(2^m)} minus A_{r^(2^(m-1))}."""
        if m == 0:
            return self.r, 1.0
        return self.r ** (2.0 ** m), self.r ** (2.0 ** (m - 1))

    def probe_rings(self, k: int, n: int = 2000, seed: int = 0) -> dict:
        """Per-ring residual of f_inf^k against the identity."""
        rng = np.random.default_rng(seed)
        rings = []
        for m in range(self.depth + 1):
            lo, hi = self.ring_bounds(m)
            rad = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
            z = rad * np.exp(1j * rng.uniform(0, TWO_PI, n))
            w = z.copy()
            for _ in range(k):
                w = self.f_inf(w)
            rings.append({"ring": m, "rho": lo, "residual": float(np.max(np.abs(w - z)))})
        res = [x["residual"] for x in rings]
        relative = [x["residual"] / x["rho"] for x in rings]
        self.manifest = {
            "r": self.r,
            "k": k,
            "depth": self.depth,
            "rings": rings,
            "monotone": bool(all(b <= a + 1e-15 for a, b in zip(res, res[1:]))),
            "max_relative_residual": float(max(relative)),
        }
        return self.manifest

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, indent=2)


def reflection_tower_extend(f0: PlaneMap, depth: int | None = None, r: float | None = None,
                            k: int | None = None) -> ReflectionTower:
    """Extend f0 (a self-map of A_r preserving both boundary circles) to the closed disk."""
    if r is None:
        r = getattr(f0, "inner_radius", None)
        if r is None:
            raise TowerError("inner radius r required")
    if not 0 < r < 1:
        raise TowerError("inner radius must lie in (0, 1)")
    _check_circle(f0, 1.0)
    _check_circle(f0, r)
    if depth is None:
        depth = default_depth(r)
    fwd = lambda z: _tower_eval(f0, r, np.asarray(z, dtype=complex))  # noqa: E731
    inv = None
    if f0.has_inverse():
        g0 = f0.inverse()
        inv = lambda w: _tower_eval(g0, r, np.asarray(w, dtype=complex))  # noqa: E731
    f_inf = PlaneMap(_disk_guard(fwd), _disk_guard(inv) if inv else None, name="tower")
    tower = ReflectionTower(f0, r, int(depth), f_inf)
    if k is not None:
        tower.probe_rings(k)
    return tower


def _disk_guard(fn):
    def run(z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > 1 + 1e-12):
            raise MapError("out of domain: point outside the closed unit disk")
        return fn(z)
    return run


def extend_to_plane(disk_map: PlaneMap, window: float = WINDOW) -> PlaneMap:
    """Extend a disk self-map fixing S^1 setwise to the plane by conjugating with z -> 1/conj(z).

    The result is defined on all of C; ``window`` is the default sampling square.
    """
    _check_circle(disk_map, 1.0)

    def make(fn):
        def run(z):
            z = np.asarray(z, dtype=complex)
            out = np.empty(z.shape, dtype=complex)
            inside = np.abs(z) <= 1
            if inside.any():
                out[inside] = fn(z[inside])
            if (~inside).any():
                out[~inside] = 1.0 / np.conj(fn(1.0 / np.conj(z[~inside])))
            return out
        return run

    inv = make(disk_map._inverse) if disk_map.has_inverse() else None
    out = PlaneMap(make(disk_map._func), inv, name="plane")
    out.window = (-window, window, -window, window)
    return out
