"""Discrete modulus of product path families and the hole-density rigidity checks.

The modulus problem

    minimise  sum_c A_c rho_c^2   subject to  L rho >= 1,  rho >= 0

(L[p, c] = length of path p inside cell c) is solved through its dual,
maximise sum(lam) - 1/4 sum_c (L^T lam)_c^2 / A_c over lam >= 0, by
accelerated projected gradient.  The primal iterate rho = L^T lam / (2A) is
rescaled to feasibility to report an honest upper bound and duality gap.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .carpet import Carpet, carpet_area
from .geometry import TWO_PI, GeometryError, Region

GAP_TOL = 1e-4
FEAS_TOL = 1e-3
MAX_ITER = 50_000
FAMILIES = ("vertical", "horizontal", "radial", "circular")


class ModulusError(ValueError):
    pass


@dataclass
class PathFamily:
    """Paths on an nx-by-ny cell grid over ``region`` as a sparse path-by-cell length matrix.

    Cells are numbered row-major (iy * nx + ix).  For log-cylinder regions
    everything is in (log|z|, arg z) coordinates, where quasihyperbolic
    length and area are Euclidean.
    """

    region: Region
    kind: str
    nx: int
    ny: int
    L: sparse.csr_matrix
    positions: np.ndarray = field(default=None)

    @property
    def n_paths(self) -> int:
        return self.L.shape[0]

    @property
    def cell_size(self) -> tuple[float, float]:
        x1, y1 = self.region.extent
        return x1 / self.nx, y1 / self.ny

    @property
    def areas(self) -> np.ndarray:
        dx, dy = self.cell_size
        return np.full(self.nx * self.ny, dx * dy)

    def lengths(self) -> np.ndarray:
        return np.asarray(self.L.sum(axis=1)).ravel()

    def subfamily(self, rows) -> "PathFamily":
        rows = np.asarray(rows)
        pos = None if self.positions is None else self.positions[rows]
        return PathFamily(self.region, self.kind, self.nx, self.ny, self.L[rows], pos)


def path_family(region: Region, kind: str, nx: int, ny: int) -> PathFamily:
    """One straight path per grid column (vertical) or row (horizontal) through cell centres.

    On a log-cylinder, ``radial`` is the horizontal family and ``circular``
    the vertical one.
    """
    if kind not in FAMILIES:
        raise ModulusError(f"unknown family {kind!r}")
    if kind in ("radial", "circular"):
        if region.kind != "log-cylinder":
            raise ModulusError("radial and circular families live on a log-cylinder")
        kind_xy = "horizontal" if kind == "radial" else "vertical"
    else:
        kind_xy = kind
    if nx < 1 or ny < 1:
        raise ModulusError("grid must have at least one cell")
    x1, y1 = region.extent
    dx, dy = x1 / nx, y1 / ny
    cells = np.arange(nx * ny).reshape(ny, nx)
    if kind_xy == "vertical":
        rows = np.repeat(np.arange(nx), ny)
        cols = cells.T.ravel()
        vals = np.full(rows.size, dy)
        pos = (np.arange(nx) + 0.5) * dx
        n = nx
    else:
        rows = np.repeat(np.arange(ny), nx)
        cols = cells.ravel()
        vals = np.full(rows.size, dx)
        pos = (np.arange(ny) + 0.5) * dy
        n = ny
    L = sparse.csr_matrix((vals, (rows, cols)), shape=(n, nx * ny))
    return PathFamily(region, kind, nx, ny, L, pos)


def family_from_polylines(region: Region, nx: int, ny: int, polylines, kind: str = "custom") -> PathFamily:
    """Paths given as polylines; lengths assigned to cells by the midpoint rule on fine pieces."""
    x1, y1 = region.extent
    dx, dy = x1 / nx, y1 / ny
    h = 0.25 * min(dx, dy)
    rows, cols, vals = [], [], []
    for p, poly in enumerate(polylines):
        v = np.asarray(poly, dtype=complex)
        total = 0.0
        for a, b in zip(v[:-1], v[1:]):
            seg = abs(b - a)
            if seg == 0:
                continue
            m = max(1, math.ceil(seg / h))
            mids = a + (b - a) * (np.arange(m) + 0.5) / m
            ix = np.clip((mids.real / dx).astype(int), 0, nx - 1)
            iy = np.clip((mids.imag / dy).astype(int), 0, ny - 1)
            rows.extend([p] * m)
            cols.extend(iy * nx + ix)
            vals.extend([seg / m] * m)
            total += seg
        if total == 0:
            raise ModulusError("degenerate path: zero length")
    L = sparse.csr_matrix((vals, (rows, cols)), shape=(len(polylines), nx * ny))
    L.sum_duplicates()
    return PathFamily(region, kind, nx, ny, L)


# ---------------------------------------------------------------------------
# densities


@dataclass
class Density:
    """Cellwise constant density on an nx-by-ny grid over a region (row-major values)."""

    region: Region
    nx: int
    ny: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.ny, self.nx)
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise ModulusError("density must be finite and nonnegative")

    @property
    def cell_area(self) -> float:
        x1, y1 = self.region.extent
        return x1 * y1 / (self.nx * self.ny)

    def integral_sq(self) -> float:
        return float(np.sum(self.values ** 2) * self.cell_area)

    @classmethod
    def constant(cls, region: Region, nx: int, ny: int, c: float = 1.0) -> "Density":
        return cls(region, nx, ny, np.full((ny, nx), float(c)))

    def to_json(self) -> dict:
        x1, y1 = self.region.extent
        return {"region": self.region.to_json(), "origin": [0.0, 0.0], "delta": [x1 / self.nx, y1 / self.ny],
                "shape": [self.ny, self.nx], "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Density":
        ny, nx = data["shape"]
        return cls(Region.from_json(data["region"]), nx, ny, np.asarray(data["values"], float))


@dataclass
class ModulusResult:
    value: float
    density: Density
    iterations: int
    gap: float
    min_path_integral: float
    converged: bool
    dual_value: float = 0.0

    def to_json(self) -> dict:
        return {"value": self.value, "gap": self.gap, "min_path_integral": self.min_path_integral,
                "iterations": self.iterations, "converged": self.converged, "density": self.density.to_json()}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _power_norm_sq(L: sparse.csr_matrix, inv_a: np.ndarray, iters: int = 100) -> float:
    """Largest eigenvalue of L diag(inv_a) L^T by power iteration."""
    v = np.ones(L.shape[0]) / math.sqrt(L.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = L @ (inv_a * (L.T @ v))
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        new = float(v @ w)
        v = w / nrm
        if abs(new - lam) <= 1e-9 * new:
            lam = new
            break
        lam = new
    return lam * 1.01


def solve_modulus(L: sparse.csr_matrix, areas: np.ndarray, tol: float = GAP_TOL, max_iter: int = MAX_ITER):
    """Returns (rho, primal value, dual value, iterations, converged)."""
    L = sparse.csr_matrix(L)
    lengths = np.asarray(L.sum(axis=1)).ravel()
    if L.shape[0] == 0:
        raise ModulusError("empty path family")
    if np.any(lengths <= 0):
        raise ModulusError("degenerate path: zero length")
    inv_a = 1.0 / np.asarray(areas, float)
    step = 2.0 / _power_norm_sq(L, inv_a)
    # start from the best uniform multiplier
    q = L @ (inv_a * (L.T @ np.ones(L.shape[0])))
    lam = np.full(L.shape[0], 2.0 * L.shape[0] / max(float(np.sum(q)), 1e-300))
    y, t = lam.copy(), 1.0
    best = (np.inf, None, -np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        s = L.T @ y
        rho_y = 0.5 * inv_a * s
        grad = 1.0 - L @ rho_y
        lam_new = np.maximum(y + step * grad, 0.0)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        y = lam_new + ((t - 1) / t_new) * (lam_new - lam)
        lam, t = lam_new, t_new
        if it % 20 == 0 or it == max_iter:
            s = L.T @ lam
            rho = 0.5 * inv_a * s
            dual = float(np.sum(lam) - 0.25 * np.sum(inv_a * s * s))
            mp = float(np.min(L @ rho))
            if mp > 0:
                rho_f = rho / mp
                primal = float(np.sum(rho_f * rho_f / inv_a))
                if primal < best[0]:
                    best = (primal, rho_f, best[2])
            best = (best[0], best[1], max(best[2], dual))
            if np.isfinite(best[0]) and best[0] - best[2] <= tol * best[0]:
                return best[1], best[0], best[2], it, True
    if best[1] is None:
        raise ModulusError("solver produced no feasible density")
    return best[1], best[0], best[2], it, False


def modulus(family: PathFamily, tol: float = GAP_TOL, max_iter: int = MAX_ITER) -> ModulusResult:
    rho, primal, dual, it, ok = solve_modulus(family.L, family.areas, tol, max_iter)
    dens = Density(family.region, family.nx, family.ny, rho)
    mp = float(np.min(family.L @ rho))
    gap = (primal - dual) / primal if primal > 0 else 0.0
    return ModulusResult(primal, dens, it, gap, mp, ok, dual)


def admissibility_check(rho: Density, family: PathFamily) -> float:
    """Minimum over paths of the line integral of rho."""
    if (rho.nx, rho.ny) != (family.nx, family.ny) or rho.region != family.region:
        raise ModulusError("grid mismatch between density and family")
    return float(np.min(family.L @ rho.values.ravel()))


def extremal_density_deviation(result, reference: float = 1.0) -> float:
    """Relative L2 deviation ||rho - c|| / ||c|| over the region."""
    dens = result.density if isinstance(result, ModulusResult) else result
    v = dens.values
    return float(np.sqrt(np.sum((v - reference) ** 2) / np.sum(np.full_like(v, reference) ** 2)))


# ---------------------------------------------------------------------------
# hole densities


@dataclass
class HolePairing:
    """Action of F on the holes: ``perm[i]`` is the index of F(hole i).

    Indices refer to ``Carpet.rects()``, so K is hole 0.
    """

    perm: np.ndarray

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=int)
        if not np.array_equal(np.sort(self.perm), np.arange(self.perm.size)):
            raise ModulusError("pairing is not a bijection on the hole set")

    @property
    def p(self) -> int:
        return int(self.perm[0])

    @property
    def q(self) -> int:
        return int(np.flatnonzero(self.perm == 0)[0])

    @classmethod
    def identity(cls, n: int) -> "HolePairing":
        return cls(np.arange(n))

    @classmethod
    def swap(cls, n: int, i: int, j: int) -> "HolePairing":
        perm = np.arange(n)
        perm[[i, j]] = perm[[j, i]]
        return cls(perm)

    @classmethod
    def cycle(cls, n: int, members) -> "HolePairing":
        perm = np.arange(n)
        members = list(members)
        for a, b in zip(members, members[1:] + members[:1]):
            perm[a] = b
        return cls(perm)


@dataclass
class HoleDensity:
    """Density constant on each hole (rects rows (cx, cy, w, h)) and zero on the carpet."""

    region: Region
    rects: np.ndarray
    values: np.ndarray
    direction: str  # side measured by l(.): "vertical" or "horizontal"

    def integral_sq(self) -> float:
        return float(np.sum(self.values ** 2 * self.rects[:, 2] * self.rects[:, 3]))

    def path_integrals(self, positions: np.ndarray, family: str) -> tuple[np.ndarray, np.ndarray]:
        """(int rho, length inside holes) along straight paths of the given family."""
        pos = np.asarray(positions, float)
        R = self.rects
        if family == "vertical":
            inside = np.abs(pos[:, None] - R[None, :, 0]) < 0.5 * R[None, :, 2]
            seg = R[:, 3]
        else:
            inside = np.abs(pos[:, None] - R[None, :, 1]) < 0.5 * R[None, :, 3]
            seg = R[:, 2]
        return inside @ (self.values * seg), inside @ seg

    def rasterize(self, nx: int, ny: int) -> Density:
        """Cell values from exact area fractions (cellwise mean of rho)."""
        x1, y1 = self.region.extent
        xe = np.linspace(0, x1, nx + 1)
        ye = np.linspace(0, y1, ny + 1)
        out = np.zeros((ny, nx))
        for (cx, cy, w, h), v in zip(self.rects, self.values):
            ox = np.clip(np.minimum(xe[1:], cx + w / 2) - np.maximum(xe[:-1], cx - w / 2), 0, None)
            oy = np.clip(np.minimum(ye[1:], cy + h / 2) - np.maximum(ye[:-1], cy - h / 2), 0, None)
            out += v * np.outer(oy, ox)
        return Density(self.region, nx, ny, out / ((x1 / nx) * (y1 / ny)))


def _hole_density(S: Carpet, pairing: HolePairing, direction: str) -> HoleDensity:
    R = S.rects()
    if pairing.perm.size != R.shape[0]:
        raise ModulusError("pairing is not a bijection on the hole set")
    side = R[:, 3] if direction == "vertical" else R[:, 2]
    vals = side[pairing.perm] / side
    return HoleDensity(S.region, R, vals, direction)


def hole_density_case1(S: Carpet, pairing: HolePairing) -> HoleDensity:
    """rho = l(F(Q)) / l(Q) on every hole, l = vertical side (so l(Q_p)/h on K, h/l(Q_q) on Q_q)."""
    if not S.has_K:
        raise ModulusError("carpet has no distinguished hole K")
    return _hole_density(S, pairing, "vertical")


def hole_density_case2(S: Carpet, pairing: HolePairing) -> HoleDensity:
    """As case 1 with l = horizontal side; meant for the horizontal family scaled by 1/a."""
    if not S.has_K:
        raise ModulusError("carpet has no distinguished hole K")
    return _hole_density(S, pairing, "horizontal")


def area_identity_rhs(S: Carpet, pairing: HolePairing, direction: str) -> float:
    """(long/short) l_p^2 + short^2 + a_eff - l_p^2 - wh, with a_eff the total hole area."""
    s, w, t, h = S.K
    R = S.rects()
    short, long_ = (h, w) if direction == "vertical" else (w, h)
    side = R[:, 3] if direction == "vertical" else R[:, 2]
    lp = side[pairing.p]
    a_eff = S.region.area - carpet_area(S)
    return (long_ / short) * lp ** 2 + short ** 2 + a_eff - lp ** 2 - w * h


def rigidity_bound_check(S: Carpet, pairing: HolePairing, grid: int = 400, tol: float = 1e-9) -> dict:
    """Numerical form of the side-length inequality for the distinguished hole K.

    Uses the vertical family when w > h and the horizontal one when w < h.
    (i) along every grid path, int rho >= length inside holes (the finite-depth
        stand-in for admissibility; equality for the identity pairing);
    (ii) int rho^2 >= area(R) - carpet area (the modulus lower bound with the
        carpet-area defect of a finite-depth carpet subtracted);
    (iii) whether min(w, h) <= l(F(K)).
    ``strict_lower_bound_ok`` is the plain area <= int rho^2, which no
    finite-depth carpet can meet since the holes miss the carpet area.
    """
    if not S.has_K:
        raise ModulusError("carpet has no distinguished hole K")
    s, w, t, h = S.K
    if math.isclose(w, h, rel_tol=1e-12):
        raise ModulusError("square hole: use the square-case theorem")
    direction = "vertical" if w > h else "horizontal"
    rho = _hole_density(S, pairing, direction)
    x1, y1 = S.region.extent
    if direction == "vertical":
        pos = (np.arange(grid) + 0.5) * x1 / grid
        path_len = y1
    else:
        pos = (np.arange(grid) + 0.5) * y1 / grid
        path_len = x1
    along, in_holes = rho.path_integrals(pos, direction)
    excess = along - in_holes
    defect = carpet_area(S)
    area = S.region.area
    isq = rho.integral_sq()
    rhs = area_identity_rhs(S, pairing, direction)
    side = S.rects()[:, 3] if direction == "vertical" else S.rects()[:, 2]
    lp = float(side[pairing.p])
    short = min(w, h)
    return {
        "case": 1 if direction == "vertical" else 2,
        "family": direction,
        "admissible": bool(excess.min() >= -tol * path_len),
        "min_path_excess": float(excess.min()),
        "min_path_integral": float(along.min() / path_len),
        "lower_bound_ok": bool(isq >= area - defect - tol * area),
        "strict_lower_bound_ok": bool(isq >= area - tol * area),
        "integral_sq": isq,
        "area": area,
        "carpet_defect": defect,
        "identity_rhs": rhs,
        "implied": bool(short <= lp + tol),
        "short_side": short,
        "l_FK": lp,
    }


# ---------------------------------------------------------------------------
# C* coordinates


def cstar_log_transform(z):
    """z -> log|z| + i arg z in [0, 2pi): quasihyperbolic lengths and areas become Euclidean."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ModulusError("object touches 0")
    return np.log(np.abs(z)) + 1j * np.mod(np.angle(z), TWO_PI)


def cstar_rect(a: float, b: float, alpha: float, beta: float) -> tuple:
    """C*-rectangle {a < |z| < b, alpha < arg z < beta} as (s, w, t, h) in log coordinates."""
    if not (0 < a < b) or not (0 < beta - alpha < TWO_PI):
        raise ModulusError("need 0 < a < b and 0 < beta - alpha < 2pi")
    return (math.log(a), math.log(b / a), alpha, beta - alpha)


def cstar_region(r: float, K=None) -> Region:
    try:
        return Region("log-cylinder", r=r, K=K)
    except GeometryError as exc:
        raise ModulusError(str(exc)) from exc


def cstar_rigidity_bound_check(S: Carpet, pairing: HolePairing, grid: int = 400, tol: float = 1e-9) -> dict:
    """The same three checks in log coordinates, with sigma(A) = 2pi log r.

    The radial side of K is its horizontal side here, so an angular side
    longer than the radial one means the horizontal (radial) family.
    """
    if S.region.kind != "log-cylinder":
        raise ModulusError("C* check needs a log-cylinder carpet")
    rep = rigidity_bound_check(S, pairing, grid, tol)
    rep["family"] = "radial" if rep["family"] == "horizontal" else "circular"
    rep["area"] = TWO_PI * math.log(S.region.r)
    return rep
