"""Hole-orbit surgery: make a carpet map's hole extension exactly periodic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..carpet import Carpet
from ..geometry import TWO_PI, RectChart, hausdorff
from ..maps import CarpetMap, CircleMap, MapError, PlaneMap, conjugator, is_periodic, rotation_map
from .annulus import periodic_annulus_extension
from .beurling_ahlfors import ba_extend
from .tower import reflection_tower_extend

ANNULUS_R = 0.5


class SurgeryError(ValueError):
    pass


@dataclass
class OrbitDecomposition:
    """Cycles of the hole permutation.

    ``orbits[j]`` lists hole indices D_j, f(D_j), ..., f^(m_j - 1)(D_j); the
    representative is the first entry.  U, V, W follow the surgery: U is the
    whole orbit, V all but the last hole, W all but the first.
    """

    holes: list
    orbits: list
    periods: list
    k: int

    @property
    def representatives(self) -> list:
        return [o[0] for o in self.orbits]

    def U(self, j: int) -> list:
        return list(self.orbits[j])

    def V(self, j: int) -> list:
        return list(self.orbits[j][:-1])

    def W(self, j: int) -> list:
        return list(self.orbits[j][1:])

    def period_of(self, hole: int) -> int:
        for o, m in zip(self.orbits, self.periods):
            if hole in o:
                return m
        raise KeyError(hole)

    def to_json(self) -> dict:
        return {"k": self.k, "orbits": [list(map(int, o)) for o in self.orbits],
                "periods": list(map(int, self.periods))}


def _boundary_samples(chart: RectChart, n: int = 32) -> np.ndarray:
    return chart.boundary_point(np.arange(n) * TWO_PI / n)


def match_holes(S: Carpet, f: PlaneMap, n: int = 32) -> np.ndarray:
    """Hole permutation induced by a plane map, by Hausdorff matching of boundaries."""
    charts = S.charts()
    thr = 0.5 * S.min_gap()
    if not np.isfinite(thr):
        thr = 0.25 * min(min(c.w, c.h) for c in charts) if charts else 0.0
    centers = np.array([c.center for c in charts])
    bds = [_boundary_samples(c, n) for c in charts]
    perm = np.full(len(charts), -1)
    for i, b in enumerate(bds):
        img = f(b)
        near = np.argsort(np.abs(centers - img.mean()))[:4]
        hits = [j for j in near if hausdorff(img, bds[j]) <= thr]
        if len(hits) != 1:
            raise SurgeryError("orbit matching failed")
        perm[i] = hits[0]
    if not np.array_equal(np.sort(perm), np.arange(len(perm))):
        raise SurgeryError("orbit matching failed")
    return perm


def hole_orbits(S: Carpet, f, k: int) -> OrbitDecomposition:
    perm = f.perm if isinstance(f, CarpetMap) else match_holes(S, f)
    perm = np.asarray(perm, dtype=int)
    seen = np.zeros(perm.size, dtype=bool)
    orbits, periods = [], []
    for i in range(perm.size):
        if seen[i]:
            continue
        orbit = [i]
        seen[i] = True
        j = perm[i]
        while j != i:
            if seen[j]:
                raise SurgeryError("orbit matching failed")
            orbit.append(int(j))
            seen[j] = True
            j = perm[j]
        if k % len(orbit):
            raise SurgeryError(f"orbit of hole {i} has period {len(orbit)}, which does not divide k={k}")
        orbits.append(orbit)
        periods.append(len(orbit))
    return OrbitDecomposition(list(range(perm.size)), orbits, periods, k)


# ---------------------------------------------------------------------------
# extensions


class _HoleIndex:
    def __init__(self, S: Carpet):
        self.S = S
        self.charts = S.charts()
        x1, y1 = S.region.extent
        self.extent = (x1, y1)

    def locate(self, z):
        z = np.asarray(z, dtype=complex)
        x1, y1 = self.extent
        if np.any((z.real < -1e-12) | (z.real > x1 + 1e-12) | (z.imag < -1e-12) | (z.imag > y1 + 1e-12)):
            raise MapError("out of domain: point outside the carpet's outer boundary")
        return self.S.hole_of(z)


def _hole_ba(cmap: CarpetMap) -> list:
    try:
        return [ba_extend(m) for m in cmap.hole_maps]
    except MapError as exc:
        raise SurgeryError(f"invalid initial extension: {exc}") from exc


def _apply_off_holes(cmap: CarpetMap, z, inverse: bool = False):
    fn = cmap.interior
    if fn is None:
        raise MapError("out of domain: no map given on the carpet itself")
    if inverse:
        if isinstance(fn, PlaneMap) and fn.has_inverse():
            return fn.inverse()(z)
        raise MapError("no inverse available on the carpet itself")
    return fn(z)


def initial_extension(S: Carpet, cmap: CarpetMap) -> PlaneMap:
    """Hole-wise extension chart_{sigma Q}^-1 o BA(phi_Q) o chart_Q, and the given map off the holes."""
    idx = _HoleIndex(S)
    if len(cmap.hole_maps) != len(idx.charts):
        raise SurgeryError("invalid initial extension: one boundary map per hole required")
    ba = _hole_ba(cmap)
    perm = cmap.perm
    inv_perm = np.argsort(perm)
    ch = idx.charts

    def fwd(z):
        z = np.asarray(z, dtype=complex)
        hole = idx.locate(z)
        out = np.empty(z.shape, dtype=complex)
        off = hole < 0
        if off.any():
            out[off] = _apply_off_holes(cmap, z[off])
        for i in np.unique(hole[~off]):
            m = hole == i
            out[m] = ch[perm[i]].from_disk(ba[i](ch[i].to_disk(z[m])))
        return out

    def inv(w):
        w = np.asarray(w, dtype=complex)
        hole = idx.locate(w)
        out = np.empty(w.shape, dtype=complex)
        off = hole < 0
        if off.any():
            out[off] = _apply_off_holes(cmap, w[off], inverse=True)
        for i in np.unique(hole[~off]):
            m = hole == i
            src = inv_perm[i]
            out[m] = ch[src].from_disk(ba[src].inverse()(ch[i].to_disk(w[m])))
        return out

    return PlaneMap(fwd, inv, name="initial-extension")


def _disk_periodic(phi: CircleMap, period: int, r: float, depth: int | None) -> PlaneMap:
    """Periodic self-map of the closed disk with boundary values phi."""
    if period == 1:
        return PlaneMap(lambda z: np.asarray(z, complex).copy(), lambda w: np.asarray(w, complex).copy(),
                        name="id")
    ann = periodic_annulus_extension(phi, r, period)
    return reflection_tower_extend(ann, depth=depth).f_inf


def carpet_periodic_extension(S: Carpet, cmap: CarpetMap, k: int, r: float = ANNULUS_R,
                              depth: int | None = None, tol: float = 1e-9) -> PlaneMap:
    """k-periodic extension of a carpet map into all holes.

    On every orbit D, f(D), ..., f^(m-1)(D) the initial extension is kept on
    all holes but the last, where it is replaced by g o f~^-(m-1); g is a
    (k/m)-periodic extension of f^m on the representative hole.
    """
    orbits = hole_orbits(S, cmap, k)
    idx = _HoleIndex(S)
    ch = idx.charts
    ba = _hole_ba(cmap)
    perm = cmap.perm

    last_of, g_of, chain_of = {}, {}, {}
    for orbit, m in zip(orbits.orbits, orbits.periods):
        ret = cmap.hole_maps[orbit[0]]
        for i in orbit[1:]:
            ret = cmap.hole_maps[i] @ ret
        ok, res = is_periodic(ret, k // m, tol)
        if not ok:
            raise SurgeryError(f"boundary data not {k}-periodic on orbit of hole {orbit[0]} (residual {res:.3g})")
        g_of[orbit[0]] = _disk_periodic(ret, k // m, r, depth)
        last_of[orbit[-1]] = orbit[0]
        chain_of[orbit[-1]] = orbit[:-1]

    def fwd(z):
        z = np.asarray(z, dtype=complex)
        hole = idx.locate(z)
        out = np.empty(z.shape, dtype=complex)
        off = hole < 0
        if off.any():
            out[off] = _apply_off_holes(cmap, z[off])
        for i in np.unique(hole[~off]):
            m = hole == i
            if i in last_of:
                # pull back through the earlier holes of the orbit, then apply g
                w = ch[i].to_disk(z[m])
                for src in reversed(chain_of[i]):
                    w = ba[src].inverse()(w)
                rep = last_of[i]
                out[m] = ch[rep].from_disk(g_of[rep](w))
            else:
                out[m] = ch[perm[i]].from_disk(ba[i](ch[i].to_disk(z[m])))
        return out

    out = PlaneMap(fwd, name="carpet-periodic")
    out.orbits = orbits
    return out


def conjugated_carpet_rotation(S: Carpet, quarter_turns: int = 1, amp: float = 0.2, seed: int = 0,
                               n: int = 64) -> CarpetMap:
    """Quarter-turn rotation of a symmetric square-hole carpet, with every hole's
    boundary correspondence pre- and post-composed with its own conjugator.

    In chart angles the rotation is a shift by quarter_turns * pi/2, so the
    boundary maps c_sigma(i) o shift o c_i^-1 compose to conjugates of a rotation
    around every orbit.
    """
    x1, y1 = S.region.extent
    c = complex(x1 / 2, y1 / 2)
    phi = quarter_turns * np.pi / 2
    rot = rotation_map(phi, c)
    charts = S.charts()
    centers = np.array([ch.center for ch in charts])
    perm = np.empty(len(charts), dtype=int)
    for i, ch in enumerate(charts):
        target = rot(np.array([ch.center]))[0]
        j = int(np.argmin(np.abs(centers - target)))
        if abs(centers[j] - target) > 1e-9 or not np.isclose(charts[j].w, ch.h) or not np.isclose(charts[j].h, ch.w):
            raise SurgeryError("carpet is not invariant under the rotation")
        if not np.isclose(ch.w, ch.h):
            raise SurgeryError("chart rotation needs square holes")
        perm[i] = j
    conj = [conjugator(n, amp, seed + i) for i in range(len(charts))]
    shift = CircleMap.rotation(phi, n)
    maps = [conj[perm[i]] @ shift @ conj[i].inverse() for i in range(len(charts))]
    return CarpetMap(perm, maps, interior=rot, meta={"quarter_turns": quarter_turns, "amp": amp, "seed": seed})
