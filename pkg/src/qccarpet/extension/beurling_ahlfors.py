"""Beurling-Ahlfors extension of piecewise-linear circle maps to the closed disk.

The disk is handled in the logarithmic coordinate w = x + iy with
zeta = exp(iw), y = -log|zeta| >= 0, so circle maps become lifts on the real
line commuting with x -> x + 2pi.  With p(u) = phi(u) - u (2pi-periodic)
the extension of the lift to the upper half-plane is

    U = x + (1/2y) * int_{x-y}^{x+y} p
    V = y + (1/y) * (int_x^{x+y} p - int_{x-y}^x p)

which fixes the identity, commutes with x -> x + 2pi and reduces to the
rotation for constant p.  All integrals are exact for PL lifts.
"""
from __future__ import annotations

import numpy as np

from ..geometry import TWO_PI
from ..maps import CircleMap, MapError, PlaneMap

NEWTON_TOL = 1e-13
NEWTON_ITERS = 60
_BOUNDARY = 1e-300


class LiftIntegral:
    """Exact evaluation of p(u) = phi(u) - u and its antiderivative for a PL lift."""

    def __init__(self, f: CircleMap):
        if f.sign < 0:
            raise MapError("orientation: Beurling-Ahlfors extension needs an orientation-preserving map")
        self.f = f
        self.x0 = f._xs[0]
        self.xs = f._xs
        self.ps = f._ys - f._xs
        seg = 0.5 * (self.ps[1:] + self.ps[:-1]) * np.diff(self.xs)
        self.cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.total = self.cum[-1]
        self.slopes = np.diff(self.ps) / np.diff(self.xs)

    def _locate(self, t):
        k = np.floor((t - self.x0) / TWO_PI)
        base = t - k * TWO_PI
        idx = np.clip(np.searchsorted(self.xs, base, side="right") - 1, 0, self.xs.size - 2)
        return k, idx, base - self.xs[idx]

    def p(self, t):
        _, idx, d = self._locate(np.asarray(t, dtype=float))
        return self.ps[idx] + self.slopes[idx] * d

    def integral(self, a, length):
        """int_a^{a+length} p for length >= 0, summed as tail + whole segments + head.

        Whole segments enter through differences of the cumulative table,
        which vanish exactly for neighbouring segments, and the piece lengths
        are taken from ``length`` rather than from rounded endpoints, so short
        intervals keep full relative precision.
        """
        a, length = np.broadcast_arrays(np.asarray(a, float), np.asarray(length, float))
        b = a + length
        n = self.xs.size - 1
        ka, ia, da = self._locate(a)
        kb, ib, db = self._locate(b)
        pa = self.ps[ia] + self.slopes[ia] * da
        pb = self.ps[ib] + self.slopes[ib] * db
        same = (ka == kb) & (ia == ib)
        tail_len = (self.xs[ia + 1] + ka * TWO_PI) - a
        head_len = length - ((self.xs[ib] + kb * TWO_PI) - a)
        tail = tail_len * 0.5 * (pa + self.ps[ia + 1])
        head = head_len * 0.5 * (self.ps[ib] + pb)
        ga1 = ka * n + ia + 1
        gb = kb * n + ib
        whole = (np.floor_divide(gb, n) - np.floor_divide(ga1, n)) * self.total \
            + self.cum[np.mod(gb, n).astype(int)] - self.cum[np.mod(ga1, n).astype(int)]
        return np.where(same, length * 0.5 * (pa + pb), tail + whole + head)


def ba_halfplane(L: LiftIntegral, x, y):
    """(U, V) of the extension at x + iy, y > 0."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    i1 = L.integral(x - y, 2 * y)
    i2 = L.integral(x, y) - L.integral(x - y, y)
    return x + i1 / (2 * y), y + i2 / y


def ba_jacobian(L: LiftIntegral, x, y):
    """Analytic partial derivatives (Ux, Uy, Vx, Vy)."""
    pp, pm, p0 = L.p(x + y), L.p(x - y), L.p(x)
    i1 = L.integral(x - y, 2 * y)
    i2 = L.integral(x, y) - L.integral(x - y, y)
    ux = 1 + (pp - pm) / (2 * y)
    uy = (pp + pm) / (2 * y) - i1 / (2 * y * y)
    vx = (pp - 2 * p0 + pm) / y
    vy = 1 + (pp - pm) / y - i2 / (y * y)
    return ux, uy, vx, vy


def _forward(L: LiftIntegral, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    rad = np.abs(zeta)
    if np.any(rad > 1 + 1e-12):
        raise MapError("out of domain: point outside the closed unit disk")
    out = np.zeros(zeta.shape, dtype=complex)
    on_circle = rad >= 1 - 1e-15
    inner = (~on_circle) & (rad > _BOUNDARY)
    theta = np.angle(zeta)
    out[on_circle] = np.exp(1j * L.f.lift(theta[on_circle]))
    if inner.any():
        U, V = ba_halfplane(L, theta[inner], -np.log(rad[inner]))
        out[inner] = np.exp(-V) * np.exp(1j * U)
    return out


def newton_solve(L: LiftIntegral, x, y, Ut, Vt):
    """Solve (U, V)(x, y) = (Ut, Vt) by damped Newton, per point until it stagnates."""
    x, y = x.copy(), y.copy()
    act = np.arange(x.size)
    U, V = ba_halfplane(L, x, y)
    err = np.hypot(U - Ut, V - Vt)
    for _ in range(NEWTON_ITERS):
        if act.size == 0:
            break
        xa, ya, ea = x[act], y[act], err[act]
        ru, rv = U[act] - Ut[act], V[act] - Vt[act]
        ux, uy, vx, vy = ba_jacobian(L, xa, ya)
        det = ux * vy - uy * vx
        dx = (vy * ru - uy * rv) / det
        dy = (ux * rv - vx * ru) / det
        step = np.ones_like(xa)
        for _ in range(40):
            yn = ya - step * dy
            step = np.where(yn <= 0, 0.5 * step, step)
            if np.all(yn > 0):
                break
        xn, yn = xa - step * dx, ya - step * dy
        Un, Vn = ba_halfplane(L, xn, yn)
        en = np.hypot(Un - Ut[act], Vn - Vt[act])
        for _ in range(30):
            worse = en > ea
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
            xn, yn = xa - step * dx, ya - step * dy
            Un, Vn = ba_halfplane(L, xn, yn)
            en = np.hypot(Un - Ut[act], Vn - Vt[act])
        better = en < ea
        x[act] = np.where(better, xn, xa)
        y[act] = np.where(better, yn, ya)
        U[act] = np.where(better, Un, U[act])
        V[act] = np.where(better, Vn, V[act])
        err[act] = np.where(better, en, ea)
        scale = 1 + np.abs(Ut[act]) + Vt[act]
        done = (~better) | (err[act] <= NEWTON_TOL * scale) | (np.hypot(step * dx, step * dy) <= 1e-16 * scale)
        act = act[~done]
    return x, y


def _inverse(L: LiftIntegral, finv: CircleMap, w):
    w = np.asarray(w, dtype=complex)
    rad = np.abs(w)
    if np.any(rad > 1 + 1e-12):
        raise MapError("out of domain: point outside the closed unit disk")
    out = np.zeros(w.shape, dtype=complex)
    on_circle = rad >= 1 - 1e-15
    inner = (~on_circle) & (rad > _BOUNDARY)
    ang = np.angle(w)
    out[on_circle] = np.exp(1j * finv.lift(ang[on_circle]))
    if not inner.any():
        return out
    x = finv.lift(ang[inner])
    Vt = -np.log(rad[inner])
    fx = L.f.lift(x)
    Ut = fx + np.angle(np.exp(1j * (ang[inner] - fx)))
    x, y = newton_solve(L, x, Vt.copy(), Ut, Vt)
    out[inner] = np.exp(-y) * np.exp(1j * x)
    return out


def ba_extend(f: CircleMap) -> PlaneMap:
    """Quasiconformal self-map of the closed unit disk with boundary values f and 0 -> 0."""
    L = LiftIntegral(f)
    finv = f.inverse()
    return PlaneMap(lambda z: _forward(L, z), lambda w: _inverse(L, finv, w), name="ba")
