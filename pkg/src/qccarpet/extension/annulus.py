"""Periodic quasiconformal extension of a periodic circle map to a closed annulus.

The annulus r <= |z| <= 1 is cut along the radial segments through the orbit
u_j = f^j(u_0) into polar cells D_j.  The cell ahead of u_j runs counter-
clockwise to the next orbit point, which is u_{j+m'} for the rotation number
m/k of f, so D_j is carried onto D_{j+1} and the boundary maps close up after
k steps.

Cell charts send (radius, angle) affinely onto [-1, 1]^2 and then onto the
disk by the shell map, which is affine on each side.  Because f is PL and the
side identifications are affine, every boundary map psi_j is an exact PL
circle map in chart angle, so the cycle composite is the identity up to
rounding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import TWO_PI, PointC, disk_to_square, square_to_disk
from ..maps import CircleMap, MapError, PlaneMap, is_periodic, local_dilatation, minimal_period, mod2pi
from .beurling_ahlfors import ba_extend

PERIOD_TOL = 1e-9
_KINK_DEDUP = 1e-12
SIDE_SAMPLES = 32


class AnnulusError(ValueError):
    pass


@dataclass(frozen=True)
class AnnulusDecomposition:
    """Orbit cells of A_r.

    ``theta[j]`` is arg u_j, ``delta[j]`` the ccw length of alpha_j and
    ``succ[j]`` the orbit index of the far endpoint of alpha_j.
    """

    r: float
    k: int
    theta: np.ndarray
    delta: np.ndarray
    succ: np.ndarray

    @property
    def u(self) -> list[PointC]:
        pts = [PointC.from_complex(np.exp(1j * t)) for t in self.theta]
        return pts + [pts[0]]

    def cell_of(self, z) -> np.ndarray:
        """Index of the cell whose angular sector contains arg z."""
        ang = np.mod(np.angle(np.asarray(z, dtype=complex)), TWO_PI)
        off = np.mod(ang[..., None] - self.theta, TWO_PI)
        inside = off < self.delta
        return np.argmax(inside, axis=-1)

    def offset(self, j: int, ang):
        """Angle minus theta_j, brought into [0, delta_j] with rounding slack."""
        t = np.mod(ang - self.theta[j], TWO_PI)
        back = t > 0.5 * (TWO_PI + self.delta[j])
        t = np.where(back, t - TWO_PI, t)
        return np.clip(t, 0.0, self.delta[j])

    def to_square(self, j: int, z):
        z = np.asarray(z, dtype=complex)
        X = 2 * (np.abs(z) - self.r) / (1 - self.r) - 1
        Y = 2 * self.offset(j, np.angle(z)) / self.delta[j] - 1
        return np.clip(X, -1, 1) + 1j * Y

    def from_square(self, j: int, q):
        q = np.asarray(q, dtype=complex)
        rho = self.r + 0.5 * (q.real + 1) * (1 - self.r)
        ang = self.theta[j] + 0.5 * (q.imag + 1) * self.delta[j]
        return rho * np.exp(1j * ang)

    def chart(self, j: int, z):
        return square_to_disk(self.to_square(j, z))

    def chart_inv(self, j: int, w):
        return self.from_square(j, disk_to_square(w))

    def cell_polygon(self, j: int, n: int = 64) -> np.ndarray:
        t = self.theta[j] + np.linspace(0, self.delta[j], n)
        return np.concatenate([np.exp(1j * t), self.r * np.exp(1j * t[::-1])])

    def cell_area(self, j: int) -> float:
        return 0.5 * self.delta[j] * (1 - self.r ** 2)


def _orbit(f: CircleMap, u0: float, k: int) -> np.ndarray:
    out = [float(u0)]
    for _ in range(k - 1):
        out.append(float(f.lift(out[-1])))
    return mod2pi(np.asarray(out))


def _min_cyclic_gap(angles: np.ndarray) -> float:
    s = np.sort(angles)
    return float(np.min(np.diff(np.append(s, s[0] + TWO_PI))))


def default_u0(f: CircleMap, k: int, n: int = 256) -> float:
    """Scan angle maximising the smallest gap in its orbit."""
    cands = np.arange(n) * TWO_PI / n
    gaps = [_min_cyclic_gap(_orbit(f, u, k)) for u in cands]
    return float(cands[int(np.argmax(gaps))])


def decompose_annulus(f: CircleMap, r: float, u0: float | None = None, k: int | None = None) -> AnnulusDecomposition:
    if not 0 < r < 1:
        raise AnnulusError("inner radius must lie in (0, 1)")
    if f.sign < 0:
        raise AnnulusError("orientation: f must preserve orientation")
    if k is None or k < 2:
        raise AnnulusError("decomposition needs k >= 2")
    ok, res = is_periodic(f, k, PERIOD_TOL)
    if not ok:
        raise AnnulusError(f"f is not {k}-periodic (residual {res:.3g})")
    if u0 is None:
        u0 = default_u0(f, k)
    theta = _orbit(f, u0, k)
    if _min_cyclic_gap(theta) <= 1e-9:
        raise AnnulusError("degenerate orbit: choose different u0 or reduce k")
    order = np.argsort(theta)
    rank = np.empty(k, dtype=int)
    rank[order] = np.arange(k)
    succ = order[(rank + 1) % k]
    delta = np.mod(theta[succ] - theta, TWO_PI)
    return AnnulusDecomposition(float(r), int(k), theta, delta, succ)


# ---------------------------------------------------------------------------
# glue maps


SIDES = ("outer", "far", "inner", "near")


@dataclass
class GlueMaps:
    """Boundary maps h_j: C_j -> C_{j+1} in side coordinates.

    A point of C_j is (side, t), t in [0, 1] running counterclockwise around
    the cell: outer arc alpha_j, far segment l_succ, inner arc r*alpha_j,
    near segment l_j.  The arc map g_j sends alpha_j onto alpha_{j+1} in
    normalised arc length.
    """

    dec: AnnulusDecomposition
    f: CircleMap

    def g(self, i: int, u):
        d = self.dec
        i %= d.k
        i1 = (i + 1) % d.k
        img = self.f.lift(d.theta[i] + np.asarray(u, float) * d.delta[i])
        off = img - d.theta[i1]
        off = off - TWO_PI * np.round((off - 0.5 * d.delta[i1]) / TWO_PI)
        return np.clip(off / d.delta[i1], 0.0, 1.0)

    def g_kinks(self, i: int) -> np.ndarray:
        d = self.dec
        i %= d.k
        u = np.mod(self.f.angles - d.theta[i], TWO_PI) / d.delta[i]
        return u[(u > 0) & (u < 1)]

    def side_map(self, j: int, side: int, t):
        """(side, t) on C_j -> (side, t') on C_{j+1}."""
        t = np.asarray(t, float)
        if side == 0:
            return self.g(j, t)
        if side == 1:
            return self.g(self.dec.succ[j % self.dec.k], t)
        if side == 2:
            return 1.0 - self.g(j + 1, 1.0 - t)
        return 1.0 - self.g(j, 1.0 - t)

    def side_kinks(self, j: int, side: int) -> np.ndarray:
        if side == 0:
            return self.g_kinks(j)
        if side == 1:
            return self.g_kinks(self.dec.succ[j % self.dec.k])
        if side == 2:
            return 1.0 - self.g_kinks(j + 1)
        return 1.0 - self.g_kinks(j)

    def point(self, j: int, side: int, t):
        """Plane point of (side, t) on C_j."""
        d = self.dec
        j %= d.k
        t = np.asarray(t, float)
        if side == 0:
            return np.exp(1j * (d.theta[j] + t * d.delta[j]))
        if side == 1:
            return (1 - t * (1 - d.r)) * np.exp(1j * (d.theta[j] + d.delta[j]))
        if side == 2:
            return d.r * np.exp(1j * (d.theta[j] + (1 - t) * d.delta[j]))
        return (d.r + t * (1 - d.r)) * np.exp(1j * d.theta[j])

    def locate(self, j: int, z):
        """(side, t) of plane points on C_j, by nearest side."""
        d = self.dec
        j %= d.k
        z = np.asarray(z, dtype=complex)
        q = d.to_square(j, z)
        X, Y = q.real, q.imag
        dist = np.stack([np.abs(X - 1), np.abs(Y - 1), np.abs(X + 1), np.abs(Y + 1)])
        side = np.argmin(dist, axis=0)
        t = np.select([side == 0, side == 1, side == 2], [(Y + 1) / 2, (1 - X) / 2, (1 - Y) / 2], (X + 1) / 2)
        return side, np.clip(t, 0, 1)

    def h(self, j: int, z):
        """h_j on plane points of C_j."""
        side, t = self.locate(j, z)
        out = np.empty(np.shape(z), dtype=complex)
        for s in range(4):
            m = side == s
            if m.any():
                out[m] = self.point(j + 1, s, self.side_map(j, s, t[m]))
        return out

    def psi(self, j: int, per_side: int = SIDE_SAMPLES) -> CircleMap:
        """h_j conjugated by the cell charts, as an exact PL circle map."""
        taus, imgs = [], []
        base = np.linspace(0, 1, per_side, endpoint=False)
        for s in range(4):
            t = np.unique(np.concatenate([base, self.side_kinks(j, s)]))
            t = t[np.concatenate([[True], np.diff(t) > _KINK_DEDUP])]
            t = t[t < 1 - _KINK_DEDUP]
            taus.append(-np.pi / 4 + s * np.pi / 2 + t * np.pi / 2)
            imgs.append(-np.pi / 4 + s * np.pi / 2 + self.side_map(j, s, t) * np.pi / 2)
        tau = np.concatenate(taus)
        img = np.concatenate(imgs)
        neg = tau < 0
        tau = np.where(neg, tau + TWO_PI, tau)
        img = np.where(neg, img + TWO_PI, img)
        order = np.argsort(tau)
        return CircleMap(tau[order], img[order], _lifted=True)

    def cycle_residual(self, n: int = 512) -> float:
        """max |h_{k-1} ... h_0 (z) - z| over n samples of C_0."""
        t = (np.arange(n) + 0.5) / n * 4
        side = np.minimum(t.astype(int), 3)
        z0 = np.concatenate([self.point(0, s, t[side == s] - s) for s in range(4)])
        z = z0.copy()
        for j in range(self.dec.k):
            z = self.h(j, z)
        return float(np.max(np.abs(z - z0)))


def build_glue_maps(dec: AnnulusDecomposition, f: CircleMap) -> GlueMaps:
    return GlueMaps(dec, f)


# ---------------------------------------------------------------------------
# periodic extension


class PeriodicAnnulusMap:
    """Evaluator for the glued cell extensions H_0 .. H_{k-1}."""

    def __init__(self, glue: GlueMaps):
        self.glue = glue
        self.dec = glue.dec
        self.ba = [ba_extend(glue.psi(j)) for j in range(self.dec.k - 1)]

    def _H(self, j, z):
        return self.dec.chart_inv(j + 1, self.ba[j](self.dec.chart(j, z)))

    def _H_inv(self, j, w):
        return self.dec.chart_inv(j, self.ba[j].inverse()(self.dec.chart(j + 1, w)))

    def _last(self, z):
        for j in range(self.dec.k - 2, -1, -1):
            z = self._H_inv(j, z)
        return z

    def _last_inv(self, w):
        for j in range(self.dec.k - 1):
            w = self._H(j, w)
        return w

    def _check(self, z):
        rad = np.abs(z)
        if np.any((rad < self.dec.r - 1e-12) | (rad > 1 + 1e-12)):
            raise MapError("out of domain: point outside the annulus")

    def forward(self, z):
        z = np.asarray(z, dtype=complex)
        self._check(z)
        cell = self.dec.cell_of(z)
        out = np.empty(z.shape, dtype=complex)
        k = self.dec.k
        for j in range(k):
            m = cell == j
            if m.any():
                out[m] = self._last(z[m]) if j == k - 1 else self._H(j, z[m])
        return out

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        self._check(w)
        cell = self.dec.cell_of(w)
        out = np.empty(w.shape, dtype=complex)
        k = self.dec.k
        for j in range(k):
            m = cell == j
            if m.any():
                # w lies in D_j = H_{j-1}(D_{j-1})
                out[m] = self._last_inv(w[m]) if j == 0 else self._H_inv(j - 1, w[m])
        return out


def radial_extension(f: CircleMap, r: float) -> PlaneMap:
    def fwd(z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z) * np.exp(1j * f.lift(np.angle(z)))

    finv = f.inverse()

    def inv(w):
        w = np.asarray(w, dtype=complex)
        return np.abs(w) * np.exp(1j * finv.lift(np.angle(w)))

    return PlaneMap(fwd, inv, name="radial")


def periodic_annulus_extension(f: CircleMap, r: float, k: int, u0: float | None = None) -> PlaneMap:
    """k-periodic extension of the k-periodic map f to r <= |z| <= 1."""
    if f.sign < 0:
        raise AnnulusError("orientation: f must preserve orientation")
    ok, res = is_periodic(f, k, PERIOD_TOL)
    if not ok:
        raise AnnulusError(f"f is not {k}-periodic (residual {res:.3g})")
    d = minimal_period(f, k, PERIOD_TOL)
    if d == 1:
        out = radial_extension(f, r)
        out.name = "periodic-annulus"
        out.inner_radius = r
        return out
    dec = decompose_annulus(f, r, u0, d)
    ev = PeriodicAnnulusMap(build_glue_maps(dec, f))
    out = PlaneMap(ev.forward, ev.inverse, name="periodic-annulus")
    out.decomposition = dec
    out.inner_radius = r
    out.evaluator = ev
    return out


def cell_dilatations(F: PlaneMap, dec: AnnulusDecomposition, n: int = 24) -> np.ndarray:
    """Largest stencil dilatation inside each cell, probing an n x n polar lattice
    kept one lattice step away from the cell sides."""
    out = []
    h = 0.25 * (1 - dec.r) / n
    for j in range(dec.k):
        X, Y = np.meshgrid(np.linspace(-1, 1, n + 2)[1:-1], np.linspace(-1, 1, n + 2)[1:-1])
        z = dec.from_square(j, (X + 1j * Y).ravel())
        out.append(float(np.max(local_dilatation(F, z, h))))
    return np.asarray(out)


def dilatation_spread(F: PlaneMap, dec: AnnulusDecomposition, n: int = 24) -> float:
    d = cell_dilatations(F, dec, n)
    return float(d.max() / d.min())
