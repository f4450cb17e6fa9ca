"""Command line: carpet generation, modulus, extensions, rigidity reports and SVG plots.

Exit codes: 0 success (or identity/periodic verdict), 1 non-identity or
inconclusive verdict, 2 invalid input or failed hypothesis.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import carpet as carpet_mod
from .carpet import Carpet, CarpetError
from .extension import (SurgeryError, TowerError, ba_extend, carpet_periodic_extension, extend_to_plane,
                        periodic_annulus_extension, reflection_tower_extend)
from .geometry import TWO_PI, GeometryError, Region
from .maps import CarpetMap, CircleMap, MapError, PlaneMap, identity_map, rotation_map
from .modulus import ModulusError, cstar_rect, modulus, path_family
from .rigidity import (HypothesisError, RigidityError, carpet_rigidity_pipeline, cstar_pipeline,
                       square_carpet_pipeline)

EXIT_OK, EXIT_VERDICT, EXIT_ERROR = 0, 1, 2
INPUT_ERRORS = (CarpetError, GeometryError, ModulusError, MapError, TowerError, SurgeryError, RigidityError,
                ValueError, KeyError, OSError)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _grid(text: str | None, default: tuple[int, int]) -> tuple[int, int]:
    if not text:
        return default
    parts = text.lower().replace("x", ",").split(",")
    if len(parts) == 1:
        return int(parts[0]), int(parts[0])
    return int(parts[0]), int(parts[1])


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("QC_CARPET_THREADS", "0") or 0)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _emit(obj, out: str | None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    if args.kind == "sierpinski":
        S = carpet_mod.sierpinski(args.depth)
    elif args.kind == "ring":
        if not args.K:
            raise CarpetError("ring carpets need --K s,w,t,h")
        S = carpet_mod.ring_carpet(args.a, tuple(_floats(args.K)), args.depth)
    elif args.kind == "cstar":
        if not args.K:
            raise CarpetError("C* carpets need --K a,b,alpha,beta")
        a, b, alpha, beta = _floats(args.K)
        S = carpet_mod.cstar_carpet(args.r, cstar_rect(a, b, alpha, beta), args.depth, args.symmetry)
    else:
        S = carpet_mod.symmetric_carpet()
    carpet_mod.validate(S)
    _emit(S.to_json(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# modulus


def _region_from_args(args) -> Region:
    if args.carpet:
        return Carpet.from_json(_load_json(args.carpet)).region
    if args.family in ("radial", "circular") or args.r is not None:
        return Region("log-cylinder", r=args.r if args.r is not None else math.e)
    return Region("rectangle", a=args.a)


def cmd_modulus(args) -> int:
    region = _region_from_args(args)
    if region.kind == "log-cylinder" and args.family in ("vertical", "horizontal"):
        raise ModulusError("use radial or circular on a log-cylinder")
    if region.kind != "log-cylinder":
        default = (int(round(100 * region.a)), 100)
    else:
        default = (100, 628)
    nx, ny = _grid(args.grid, default)
    fam = path_family(region, args.family, nx, ny)
    res = modulus(fam, tol=args.tol)
    out = res.to_json()
    out["family"] = args.family
    out["grid"] = [nx, ny]
    _emit(out, args.out)
    if args.svg:
        _write_text(args.svg, svg_density(out["density"], timestamp=not args.no_timestamp))
    return EXIT_OK


# ---------------------------------------------------------------------------
# extend


def _probe_disk(n: int, lo: float = 0.0, hi: float = 1.0, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rad = np.sqrt(rng.uniform(lo * lo, hi * hi, n))
    return rad * np.exp(1j * rng.uniform(0, TWO_PI, n))


def _kth(F: PlaneMap, z: np.ndarray, k: int) -> float:
    w = z.copy()
    for _ in range(k):
        w = F(w)
    return float(np.max(np.abs(w - z)))


def cmd_extend(args) -> int:
    n = _grid(args.grid, (64, 64))[0]
    if args.mode == "carpet":
        if not (args.carpet and args.carpet_map):
            raise ValueError("carpet mode needs --carpet and --carpet-map")
        S = Carpet.from_json(_load_json(args.carpet))
        cmap = CarpetMap.from_json(_load_json(args.carpet_map))
        F = carpet_periodic_extension(S, cmap, args.k, r=args.r)
        x1, y1 = S.region.extent
        mask = lambda Z: S.hole_of(Z.ravel()).reshape(Z.shape) >= 0  # noqa: E731
        grid = F.sample(n, (0.0, x1, 0.0, y1), mask)
        rng = np.random.default_rng(0)
        Z = rng.uniform(0, x1, 4 * args.probes) + 1j * rng.uniform(0, y1, 4 * args.probes)
        Z = Z[S.hole_of(Z) >= 0][: args.probes]
        manifest = {"mode": "carpet", "k": args.k, "residual": _kth(F, Z, args.k),
                    "orbits": F.orbits.to_json()}
        _emit({"map": grid.to_json(), "manifest": manifest}, args.out)
        return EXIT_OK
    if not args.map:
        raise ValueError("--map CSV required")
    with open(args.map) as fh:
        f = CircleMap.from_csv(fh.read())
    if args.mode == "ba":
        F = ba_extend(f)
        theta = np.linspace(0, TWO_PI, 512, endpoint=False)
        bd = float(np.max(np.abs(F(np.exp(1j * theta)) - np.exp(1j * f.lift(theta)))))
        manifest = {"mode": "ba", "boundary_residual": bd}
        grid = F.sample(n, mask=lambda Z: np.abs(Z) <= 1)
    else:
        if args.k is None:
            raise ValueError("--k required for periodic modes")
        ann = periodic_annulus_extension(f, args.r, args.k)
        if args.mode == "periodic-annulus":
            z = _probe_disk(args.probes, args.r, 1.0)
            manifest = {"mode": "periodic-annulus", "k": args.k, "r": args.r, "residual": _kth(ann, z, args.k)}
            grid = ann.sample(n, mask=lambda Z: (np.abs(Z) <= 1) & (np.abs(Z) >= args.r))
        else:
            tower = reflection_tower_extend(ann, depth=args.depth, k=args.k)
            P = extend_to_plane(tower.f_inf)
            w = 2.0
            rng = np.random.default_rng(1)
            z = rng.uniform(-w, w, args.probes) + 1j * rng.uniform(-w, w, args.probes)
            manifest = dict(tower.manifest, mode="tower", plane_residual=_kth(P, z, args.k), window=w)
            grid = P.sample(n, (-w, w, -w, w))
    _emit({"map": grid.to_json(), "manifest": manifest}, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# rigidity


def load_plane_map(desc: dict) -> PlaneMap:
    """Map description: identity, rotation (angle, center), affine (a, b) or perturbed (amplitude)."""
    kind = desc.get("kind")
    if kind == "identity":
        return identity_map()
    if kind == "rotation":
        c = desc.get("center", [0.0, 0.0])
        return rotation_map(float(desc["angle"]), complex(c[0], c[1]))
    if kind == "affine":
        a = complex(*desc["a"])
        b = complex(*desc.get("b", [0.0, 0.0]))
        return PlaneMap(lambda z: a * z + b, lambda w: (w - b) / a, name="affine")
    if kind == "perturbed":
        eps = float(desc.get("amplitude", 1e-3))
        return PlaneMap(lambda z: z + eps * (np.sin(7 * z.real + 3 * z.imag) + 1j * np.cos(5 * z.real - 2 * z.imag)),
                        name="perturbed")
    raise ValueError(f"unknown map kind {kind!r}")


def cmd_rigidity(args) -> int:
    S = Carpet.from_json(_load_json(args.carpet))
    f = load_plane_map(_load_json(args.map))
    pipeline = args.pipeline
    if pipeline == "auto":
        pipeline = {"log-cylinder": "cstar", "rect-ring": "square"}.get(S.region.kind, "carpet")
    try:
        if pipeline == "cstar":
            rep = cstar_pipeline(S, f, tol=args.tol)
        elif pipeline == "square":
            rep = square_carpet_pipeline(S, f, tol=args.tol)
        else:
            rep = carpet_rigidity_pipeline(S, f, args.k, tol=args.tol, skip=tuple(args.skip or ()))
    except HypothesisError as exc:
        _emit({"verdict": "error", "error": str(exc), "hypothesis": exc.name}, args.out)
        return EXIT_ERROR
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.verdict in ("identity", "periodic") else EXIT_VERDICT


# ---------------------------------------------------------------------------
# plot


def _write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _svg(width: int, height: int, body: list[str], timestamp: bool) -> str:
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">']
    if timestamp:
        head.append(f"<!-- generated {time.strftime('%Y-%m-%dT%H:%M:%S')} -->")
    head.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def svg_carpet(data: dict, timestamp: bool = True, size: int = 600) -> str:
    S = Carpet.from_json(data)
    x1, y1 = S.region.extent
    scale = size / max(x1, y1)
    W, H = int(round(x1 * scale)) + 20, int(round(y1 * scale)) + 20

    def rect(cx, cy, w, h, fill):
        x = 10 + (cx - w / 2) * scale
        y = 10 + (y1 - cy - h / 2) * scale
        return f'<rect x="{x:.3f}" y="{y:.3f}" width="{w * scale:.3f}" height="{h * scale:.3f}" fill="{fill}"/>'

    body = [f'<rect x="10" y="10" width="{x1 * scale:.3f}" height="{y1 * scale:.3f}" fill="#222"/>']
    for i, (cx, cy, w, h) in enumerate(S.rects()):
        body.append(rect(cx, cy, w, h, "#c33" if (i == 0 and S.has_K) else "white"))
    return _svg(W, H, body, timestamp)


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    r = int(255 * min(1.0, 2 * t))
    b = int(255 * min(1.0, 2 * (1 - t)))
    g = int(255 * (1 - abs(2 * t - 1)))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_density(data: dict, timestamp: bool = True, size: int = 600) -> str:
    ny, nx = data["shape"]
    vals = np.asarray(data["values"], float).reshape(ny, nx)
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo if hi > lo else 1.0
    cw = size / max(nx, ny)
    W, H = int(nx * cw) + 100, int(ny * cw) + 20
    body = []
    for i in range(ny):
        y = 10 + (ny - 1 - i) * cw
        for j in range(nx):
            body.append(f'<rect x="{10 + j * cw:.3f}" y="{y:.3f}" width="{cw:.3f}" height="{cw:.3f}" '
                        f'fill="{_color((vals[i, j] - lo) / span)}"/>')
    # legend
    lx = int(nx * cw) + 30
    for s in range(10):
        body.append(f'<rect x="{lx}" y="{10 + s * 20}" width="20" height="20" fill="{_color(1 - s / 9)}"/>')
    body.append(f'<text x="{lx + 25}" y="24" font-size="10">{hi:.4g}</text>')
    body.append(f'<text x="{lx + 25}" y="204" font-size="10">{lo:.4g}</text>')
    return _svg(W, H, body, timestamp)


def svg_rings(manifest: dict, timestamp: bool = True) -> str:
    rings = manifest["rings"]
    res = np.array([max(r["residual"], 1e-18) for r in rings])
    W, H, pad = 500, 300, 40
    ly = np.log10(res)
    lo, hi = float(ly.min()) - 0.5, float(ly.max()) + 0.5
    n = max(len(rings) - 1, 1)
    pts = [(pad + (W - 2 * pad) * i / n, H - pad - (H - 2 * pad) * (v - lo) / (hi - lo)) for i, v in enumerate(ly)]
    body = [f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
            '<polyline fill="none" stroke="#c33" points="' + " ".join(f"{x:.2f},{y:.2f}" for x, y in pts) + '"/>',
            f'<text x="{W / 2}" y="{H - 10}" font-size="11">ring</text>',
            f'<text x="5" y="{pad - 10}" font-size="11">log10 residual</text>']
    body += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#c33"/>' for x, y in pts]
    return _svg(W, H, body, timestamp)


def cmd_plot(args) -> int:
    data = _load_json(args.input)
    ts = not args.no_timestamp
    if "holes" in data:
        text = svg_carpet(data, ts)
    elif "density" in data:
        text = svg_density(data["density"], ts)
    elif "rings" in data:
        text = svg_rings(data, ts)
    elif "manifest" in data and "rings" in data["manifest"]:
        text = svg_rings(data["manifest"], ts)
    elif "values" in data and "shape" in data and not isinstance(data["values"][0], list):
        text = svg_density(data, ts)
    else:
        raise ValueError("unrecognised JSON for plotting")
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--grid", help="N or NX,NY")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment in SVG output")
    common.add_argument("--threads", type=int, default=None, help="0 = auto; results do not depend on it")

    p = argparse.ArgumentParser(prog="qccarpet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a carpet")
    g.add_argument("kind", choices=["sierpinski", "ring", "cstar", "symmetric"])
    g.add_argument("--depth", type=int, default=1)
    g.add_argument("--a", type=float, default=2.0)
    g.add_argument("--r", type=float, default=math.e)
    g.add_argument("--K", help="ring: s,w,t,h; cstar: a,b,alpha,beta")
    g.add_argument("--symmetry", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("modulus", parents=[common], help="discrete modulus of a product family")
    m.add_argument("--family", choices=["vertical", "horizontal", "radial", "circular"], default="vertical")
    m.add_argument("--carpet", help="carpet JSON whose region is used")
    m.add_argument("--a", type=float, default=2.0)
    m.add_argument("--r", type=float, default=None)
    m.add_argument("--svg", help="also write a density heatmap")
    m.set_defaults(func=cmd_modulus)

    e = sub.add_parser("extend", parents=[common], help="quasiconformal extension of boundary data")
    e.add_argument("--mode", choices=["ba", "periodic-annulus", "tower", "carpet"], default="ba")
    e.add_argument("--map", help="circle map CSV (angle,image per line)")
    e.add_argument("--carpet")
    e.add_argument("--carpet-map")
    e.add_argument("--k", type=int)
    e.add_argument("--r", type=float, default=0.5)
    e.add_argument("--depth", type=int)
    e.add_argument("--probes", type=int, default=2000)
    e.set_defaults(func=cmd_extend)

    r = sub.add_parser("rigidity", parents=[common], help="rigidity report for a carpet self-map")
    r.add_argument("--carpet", required=True)
    r.add_argument("--map", required=True, help="map JSON: identity, rotation, affine or perturbed")
    r.add_argument("--k", type=int, default=1)
    r.add_argument("--pipeline", choices=["auto", "carpet", "square", "cstar"], default="auto")
    r.add_argument("--skip", action="append", help="hypothesis gate to skip (repeatable)")
    r.set_defaults(func=cmd_rigidity)

    pl = sub.add_parser("plot", parents=[common], help="SVG of a carpet, density or tower manifest")
    pl.add_argument("input")
    pl.set_defaults(func=cmd_plot)
    return p


TOL_DEFAULTS = {"modulus": 1e-4, "rigidity": 1e-9}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is None:
        args.tol = TOL_DEFAULTS.get(args.command, 1e-9)
    args.threads = _threads(args)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
