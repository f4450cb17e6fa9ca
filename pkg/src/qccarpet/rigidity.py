"""Periodic-point witnesses and end-to-end rigidity pipelines.

The pipelines are verification harnesses: they check the hypotheses of
the rigidity statements on sampled data, run the constructive steps
(cutting the outer circle at a fixed point, tracking the orbit of K,
the hole-density bound) and report residuals.  They never claim a proof.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .carpet import Carpet, carpet_area
from .extension.surgery import SurgeryError, hole_orbits, match_holes
from .geometry import TWO_PI, signed_area
from .maps import CarpetMap, CircleMap, MapError, PlaneMap
from .modulus import HolePairing, ModulusError, cstar_log_transform, cstar_rigidity_bound_check, \
    rigidity_bound_check

TOL = 1e-9  # identity verdict
LOOSE_TOL = 1e-2  # hypothesis checks on sampled maps
MAX_ORBIT = 50
CONJECTURE_NOTE = ("open: whether these hypotheses force f = id when K is not a C*-square "
                   "is conjectured but unproved; only periodicity is reported")


class RigidityError(ValueError):
    pass


class HypothesisError(RigidityError):
    """A named hypothesis failed; ``name`` identifies it."""

    def __init__(self, name: str, detail: str):
        super().__init__(f"{name}: {detail}")
        self.name = name


# ---------------------------------------------------------------------------
# periodic points on intervals and circles


class IntervalMap:
    """Increasing homeomorphism of [s, t] fixing both ends.

    Piecewise linear through (breakpoints, values), or an exact callable
    via ``from_callable``.
    """

    def __init__(self, breakpoints, values, _func=None):
        x = np.asarray(breakpoints, float).ravel()
        y = np.asarray(values, float).ravel()
        if x.size != y.size or x.size < 2:
            raise RigidityError("need matching breakpoints and values")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise RigidityError("interval map must be strictly increasing")
        scale = max(1.0, abs(x[0]), abs(x[-1]))
        if abs(y[0] - x[0]) > 1e-12 * scale or abs(y[-1] - x[-1]) > 1e-12 * scale:
            raise RigidityError("interval map must fix both endpoints")
        y[0], y[-1] = x[0], x[-1]
        self.breakpoints, self.values = x, y
        self._func = _func

    @classmethod
    def from_callable(cls, fn, s: float, t: float, n: int = 257) -> "IntervalMap":
        x = np.linspace(s, t, n)
        return cls(x, fn(x), _func=fn)

    @classmethod
    def identity(cls, s: float = 0.0, t: float = 1.0) -> "IntervalMap":
        return cls([s, t], [s, t])

    @property
    def s(self) -> float:
        return float(self.breakpoints[0])

    @property
    def t(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, x):
        x = np.asarray(x, float)
        if self._func is not None:
            return np.clip(self._func(x), self.s, self.t)
        return np.interp(x, self.breakpoints, self.values)


@dataclass
class Witness:
    x: float
    orbit: list
    direction: str  # "decreasing" or "increasing"
    drift: float

    def to_json(self) -> dict:
        return {"x": self.x, "orbit": self.orbit, "direction": self.direction, "drift": self.drift}


def _strictly_monotone(orbit, direction: str) -> bool:
    d = np.diff(orbit)
    return bool(np.all(d < 0) if direction == "decreasing" else np.all(d > 0))


def interval_periodicity_witness(h: IntervalMap, N: int = MAX_ORBIT, probes: int = 257,
                                 tol: float = TOL) -> Witness | None:
    """A point that is not periodic (up to N) with its strictly monotone orbit, or None if h = id.

    The probe of largest displacement is used.  Iteration stops early once
    the orbit reaches a numerical fixed point, so the returned orbit is
    strictly monotone as a list of floats.
    """
    xs = np.unique(np.concatenate([np.linspace(h.s, h.t, probes + 2)[1:-1], h.breakpoints[1:-1]]))
    d = h(xs) - xs
    i = int(np.argmax(np.abs(d)))
    if abs(d[i]) <= tol * max(1.0, h.t - h.s):
        return None
    x0 = float(xs[i])
    direction = "decreasing" if d[i] < 0 else "increasing"
    orbit = [x0]
    x = x0
    for _ in range(N):
        nxt = float(h(x))
        if (nxt >= x) if direction == "decreasing" else (nxt <= x):
            break
        orbit.append(nxt)
        x = nxt
    if not _strictly_monotone(orbit, direction):
        raise RigidityError("orbit is not monotone: map is not increasing")
    return Witness(x0, orbit, direction, float(orbit[-1] - x0))


def find_fixed_point(h: CircleMap, tol: float = TOL, n: int = 4096) -> float | None:
    """An angle with h(angle) = angle up to tol, checking breakpoints and a fine grid."""
    theta = np.unique(np.concatenate([h.angles, np.linspace(0, TWO_PI, n, endpoint=False)]))
    d = np.angle(np.exp(1j * (h.lift(theta) - theta)))
    i = int(np.argmin(np.abs(d)))
    if abs(d[i]) > tol:
        return None
    return float(theta[i])


def circle_periodicity_witness(h: CircleMap, N: int = MAX_ORBIT, probes: int = 257, tol: float = TOL,
                               fixed: float | None = None, fixed_tol: float | None = None) -> Witness | None:
    """Cut the circle at a fixed point of h and look for a non-periodic point of the interval map.

    Witness coordinates are arc lengths from the fixed point.
    """
    if h.sign < 0:
        raise HypothesisError("orientation", "circle map reverses orientation")
    if fixed is None:
        fixed = find_fixed_point(h, TOL if fixed_tol is None else fixed_tol)
        if fixed is None:
            raise HypothesisError("no fixed point", "lemma hypotheses unmet")
    z0 = float(fixed)
    base = float(h.lift(z0))
    knots = np.mod(h.angles - z0, TWO_PI)
    knots = np.unique(np.concatenate([[0.0, TWO_PI], knots[(knots > 1e-12) & (knots < TWO_PI - 1e-12)]]))
    vals = h.lift(z0 + knots) - base
    vals[0], vals[-1] = 0.0, TWO_PI
    return interval_periodicity_witness(IntervalMap(knots, vals), N, probes, tol)


# ---------------------------------------------------------------------------
# reports


@dataclass
class RigidityReport:
    verdict: str  # identity | non-identity witness | inconclusive | periodic | contradiction
    residual: float
    witness: Witness | None = None
    orbit_period: int | None = None
    hypothesis_checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.hypothesis_checks.append({"name": name, "pass": bool(ok), "detail": detail})

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "residual": self.residual,
               "witness": None if self.witness is None else self.witness.to_json(),
               "orbit_period": self.orbit_period, "hypothesis_checks": self.hypothesis_checks}
        if self.notes:
            out["notes"] = self.notes
        if self.details:
            out["details"] = self.details
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _gate(report: RigidityReport, name: str, ok: bool, detail: str) -> None:
    report.check(name, ok, detail)
    if not ok:
        raise HypothesisError(name, detail)


def carpet_samples(S: Carpet, per_hole: int = 16, grid: int = 48, outer: int = 256) -> np.ndarray:
    """Points of a finite carpet: outer boundary, hole boundaries and lattice points off the holes."""
    pts = [S.outer_chart().boundary_point(np.arange(outer) * TWO_PI / outer)]
    theta = np.arange(per_hole) * TWO_PI / per_hole
    for ch in S.charts():
        pts.append(ch.boundary_point(theta))
    x1, y1 = S.region.extent
    Z = (np.linspace(0, x1, grid)[None, :] + 1j * np.linspace(0, y1, grid)[:, None]).ravel()
    pts.append(Z[S.hole_of(Z, tol=-1e-12) < 0])
    return np.concatenate(pts)


def _verdict(report: RigidityReport, tol: float, loose: float) -> None:
    if report.residual <= tol:
        report.verdict = "identity"
    elif report.witness is not None and report.residual > loose:
        report.verdict = "non-identity witness"
    else:
        report.verdict = "inconclusive"
        report.notes.append("residual at sampling level: cannot separate a non-identity map from discretization")


def _outer_circle_map(S: Carpet, f: PlaneMap, n: int) -> tuple[CircleMap, float]:
    ch = S.outer_chart()
    theta = np.arange(n) * TWO_PI / n
    img = f(ch.boundary_point(theta))
    off = float(np.max(np.abs(ch.boundary_point(ch.boundary_angle(img)) - img)))
    ang = ch.boundary_angle(img)
    return CircleMap(theta, ang), off


def carpet_rigidity_pipeline(S: Carpet, f: PlaneMap, k: int, fixed_point: float | None = None,
                             tol: float = TOL, loose: float = LOOSE_TOL, n: int = 256,
                             skip: tuple = ()) -> RigidityReport:
    """Periodic self-map of a quasi-round carpet with a fixed point on its outer circle.

    ``fixed_point`` is an outer-chart angle; by default one is searched for
    at one sample spacing.  Names in ``skip`` disable the matching gates.
    """
    rep = RigidityReport("inconclusive", 0.0)
    Z = carpet_samples(S, outer=n)
    fz = f(Z)
    rep.residual = float(np.max(np.abs(fz - Z)))
    diam = math.hypot(*S.region.extent)
    if "periodic" not in skip:
        w = fz
        for _ in range(k - 1):
            w = f(w)
        res = float(np.max(np.abs(w - Z)))
        _gate(rep, "periodic", res <= loose * diam, f"f^{k} residual {res:.3g}")
    h, off = _outer_circle_map_checked(S, f, n, rep, loose * diam, skip)
    if "orientation" not in skip:
        ob = f(S.outer_chart().boundary_point(np.arange(n) * TWO_PI / n))
        _gate(rep, "orientation", signed_area(ob) > 0 and h.sign > 0, "outer circle image orientation")
    spacing = TWO_PI / n
    if fixed_point is None:
        fixed_point = find_fixed_point(h, spacing)
        if fixed_point is None:
            rep.check("no fixed point", False, "no outer-circle fixed point within one sample spacing")
            raise HypothesisError("no fixed point", "lemma hypotheses unmet")
    rep.check("fixed point", True, f"outer-chart angle {fixed_point:.6g}")
    rep.witness = circle_periodicity_witness(h, tol=tol, fixed=fixed_point)
    rep.details = {"outer_offset": off, "samples": int(Z.size), "carpet_area": carpet_area(S)}
    _verdict(rep, tol * diam, loose * diam)
    return rep


def _outer_circle_map_checked(S, f, n, rep, loose, skip):
    try:
        h, off = _outer_circle_map(S, f, n)
    except MapError as exc:
        rep.check("self-map", False, str(exc))
        raise HypothesisError("self-map", "outer circle is not mapped homeomorphically onto itself") from exc
    if "self-map" not in skip:
        _gate(rep, "self-map", off <= loose, f"outer circle image off the boundary by {off:.3g}")
    return h, off


def _orbit_of_K(perm: np.ndarray) -> list:
    orbit = [0]
    j = int(perm[0])
    while j != 0:
        orbit.append(j)
        j = int(perm[j])
    return orbit


def square_carpet_pipeline(S: Carpet, f: PlaneMap | None = None, pairing: HolePairing | None = None,
                           tol: float = TOL, loose: float = LOOSE_TOL, grid: int = 400) -> RigidityReport:
    """Square carpet in a rectangle ring R minus K.

    The hole permutation comes from matching hole boundaries under ``f`` or
    from an explicit ``pairing``.  Reports the least n with f^n(dK) = dK,
    all hole orbits, and the hole-density side bound for the pairing.
    """
    if not S.has_K or S.region.kind != "rect-ring":
        raise RigidityError("square_carpet_pipeline needs a rectangle-ring carpet")
    rep = RigidityReport("inconclusive", 0.0)
    x1, y1 = S.region.extent
    diam = math.hypot(x1, y1)
    if f is not None:
        corners = np.array([0, x1, x1 + 1j * y1, 1j * y1])
        dev = float(np.max(np.abs(f(corners) - corners)))
        _gate(rep, "fixes the four vertices", dev <= loose * diam, f"vertex displacement {dev:.3g}")
    if pairing is None:
        if f is None:
            raise RigidityError("need a map or a pairing")
        try:
            perm = match_holes(S, f)
        except SurgeryError as exc:
            rep.check("hole set invariant", False, str(exc))
            raise HypothesisError("hole set invariant", "orbit leaves the hole set") from exc
        rep.check("hole set invariant", True, "boundaries matched")
        pairing = HolePairing(perm)
    perm = pairing.perm
    orbit = _orbit_of_K(perm)
    rep.orbit_period = len(orbit)
    orbits = hole_orbits(S, CarpetMap(perm, [None] * perm.size), int(np.lcm.reduce(_cycle_lengths(perm))))
    rep.details["orbits"] = [o for o in orbits.orbits if len(o) > 1]
    s, w, t, h = S.K
    if math.isclose(w, h, rel_tol=1e-12):
        rep.notes.append("K is a square: side bound not applicable")
    else:
        bound = rigidity_bound_check(S, pairing, grid=grid)
        rep.details["bound"] = bound
        if not bound["implied"]:
            rep.verdict = "contradiction"
            rep.notes.append("pairing shrinks K: excluded by the hole-density bound")
            return rep
    if f is not None:
        Z = carpet_samples(S)
        rep.residual = float(np.max(np.abs(f(Z) - Z)))
        _verdict(rep, tol * diam, loose * diam)
    else:
        rep.residual = float("nan")
        rep.verdict = "identity" if np.array_equal(perm, np.arange(perm.size)) else "inconclusive"
    return rep


def _cycle_lengths(perm: np.ndarray) -> list:
    seen = np.zeros(perm.size, bool)
    out = []
    for i in range(perm.size):
        if seen[i]:
            continue
        m, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            m += 1
        out.append(m)
    return out


def _log_map(f: PlaneMap) -> PlaneMap:
    return PlaneMap(lambda w: cstar_log_transform(f(np.exp(np.asarray(w, complex)))), name="log")


def cstar_pipeline(S: Carpet, f: PlaneMap | None = None, pairing: HolePairing | None = None,
                   max_period: int = 64, tol: float = 1e-9, loose: float = LOOSE_TOL,
                   grid: int = 400, n: int = 256) -> RigidityReport:
    """C*-square carpet in 1 <= |z| <= r minus K; ``f`` acts on the annulus in the z-plane.

    Finds the orbit period n of K, runs the side bound in log coordinates
    and then the least p <= max_period with f^p = id on carpet samples.
    """
    if S.region.kind != "log-cylinder" or not S.has_K:
        raise RigidityError("cstar_pipeline needs a log-cylinder carpet with K")
    r = S.region.r
    rep = RigidityReport("inconclusive", 0.0, notes=[CONJECTURE_NOTE])
    if f is not None:
        circ = np.exp(1j * np.arange(n) * TWO_PI / n)
        inner_dev = float(np.max(np.abs(np.abs(f(circ)) - 1)))
        outer_img = f(r * circ)
        outer_dev = float(np.max(np.abs(np.abs(outer_img) - r)) / r)
        _gate(rep, "inner circle preserved", inner_dev <= loose, f"deviation {inner_dev:.3g}")
        _gate(rep, "outer circle preserved", outer_dev <= loose, f"relative deviation {outer_dev:.3g}")
        steps = np.angle(np.roll(outer_img, -1) / outer_img)
        _gate(rep, "orientation", bool(np.all(steps > 0)), "outer circle traversed counterclockwise")
    if pairing is None:
        if f is None:
            raise RigidityError("need a map or a pairing")
        try:
            perm = match_holes(S, _log_map(f))
        except (SurgeryError, ModulusError) as exc:
            rep.check("hole set invariant", False, str(exc))
            raise HypothesisError("hole set invariant", "orbit leaves the hole set") from exc
        rep.check("hole set invariant", True, "boundaries matched")
        pairing = HolePairing(perm)
    orbit = _orbit_of_K(pairing.perm)
    rep.orbit_period = len(orbit)
    s, w, t, h = S.K
    if not math.isclose(w, h, rel_tol=1e-12):
        bound = cstar_rigidity_bound_check(S, pairing, grid=grid)
        rep.details["bound"] = bound
        if not bound["implied"]:
            rep.verdict = "contradiction"
            rep.notes.append("pairing shrinks K: excluded by the hole-density bound")
            return rep
    if f is None:
        rep.residual = float("nan")
        return rep
    Z = np.exp(carpet_samples(S))
    rep.residual = float(np.max(np.abs(f(Z) - Z)))
    w_ = Z.copy()
    res = []
    for p in range(1, max_period + 1):
        w_ = f(w_)
        res.append(float(np.max(np.abs(w_ - Z))))
        if res[-1] <= tol * r:
            rep.verdict = "periodic"
            rep.details["order"] = p
            if p % rep.orbit_period:
                rep.notes.append("order is not a multiple of the orbit period of K")
            break
    else:
        rep.details["order"] = None
        rep.notes.append(f"no period up to {max_period} within tolerance")
    rep.details["period_residuals"] = res
    return rep
