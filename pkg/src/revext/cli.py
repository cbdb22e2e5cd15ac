"""Command-line front end: stratum sampling, bifurcation tables and
diagrams, regime classification, continuum graphs, rotation numbers, and
operator-model verification, with JSON/CSV/DOT/SVG output.

Config files are flat ``key=value`` text; command-line flags override
config values.  All commands are deterministic (fixed grids, no random
seeds), so re-running reproduces outputs bit-identically.  The environment
variable REVEXT_THREADS caps the worker pool used by parameter sweeps.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import circle as ci
from . import logistic as lg
from . import operator_model as om
from .core import make_constant_system
from .extension import (INF, EmptyStratum, ExtensionSpec, dump_stratum,
                        sample_stratum, stratum_to_json)


def _thread_cap() -> int:
    raw = os.environ.get("REVEXT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n if n > 0 else (os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# Config


@dataclass
class RunConfig:
    command: str
    system: str = "logistic"
    lam: float = 0.6
    tau: float = 0.25
    gamma0: Optional[float] = None
    perturbation: float = 0.0
    p: float = 1.0 / 3.0
    N: int = 10
    N_max: int = 8
    depth: int = 20
    density: int = 60
    n_iter: int = 100_000
    n: int = 1
    m: int = 0
    regime: str = "cascade"
    lambda_min: float = 0.74
    lambda_max: float = 1.0
    steps: int = 2000
    output: str = "out"
    format: str = "json"

    def validate(self) -> None:
        for name in ("N", "N_max", "depth", "density", "n_iter", "steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not (0.0 < self.lam <= 1.0):
            raise ValueError("lambda must be in (0, 1]")
        if self.format not in ("json", "csv", "svg", "dot"):
            raise ValueError(f"unknown format {self.format!r}")


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out: dict = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


_FIELD_TYPES = {f: t for f, t in RunConfig.__annotations__.items()}


def _coerce(name: str, value):
    if value is None or not isinstance(value, str):
        return value
    t = _FIELD_TYPES.get(name)
    if t in ("int",):
        return int(value)
    if t in ("float", "Optional[float]"):
        return float(value)
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = read_config_file(args.config) if args.config else {}
    cfg = RunConfig(command=args.command)
    for name in _FIELD_TYPES:
        if name == "command":
            continue
        if name in file_cfg:
            setattr(cfg, name, _coerce(name, file_cfg[name]))
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            setattr(cfg, name, cli_val)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Minimal SVG emitter


@dataclass
class SvgCanvas:
    width: float = 640.0
    height: float = 480.0
    elements: list = field(default_factory=list)

    def polyline(self, pts, color="black", width=1.0) -> None:
        if len(pts) < 2:
            return
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.elements.append(
            f'<polyline points="{coords}" fill="none" '
            f'stroke="{color}" stroke-width="{width}"/>')

    def dot(self, x: float, y: float, r: float = 1.2,
            color="black") -> None:
        self.elements.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def text(self, x: float, y: float, s: str, size: int = 11) -> None:
        self.elements.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" '
            f'font-family="monospace">{s}</text>')

    def write(self, path: str) -> None:
        body = "\n".join(self.elements)
        doc = (f'<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{self.width:.0f}" height="{self.height:.0f}" '
               f'viewBox="0 0 {self.width:.0f} {self.height:.0f}">\n'
               f'{body}\n</svg>\n')
        with open(path, "w") as fh:
            fh.write(doc)


# ---------------------------------------------------------------------------
# Commands


def _extension_spec_for(cfg: RunConfig) -> ExtensionSpec:
    if cfg.system == "logistic":
        return lg.extension_spec(cfg.lam)
    if cfg.system == "constant":
        return ExtensionSpec(make_constant_system(cfg.p), ((0.0, 1.0),))
    raise ValueError(f"unknown interval system {cfg.system!r}")


def _ladder_svg(samples: dict, path: str) -> None:
    """Rows of strata (finite N top to bottom, infinite part last), each
    chain drawn as its head coordinate; successive coordinates of the same
    chain are offset into a short spring to hint at the backward orbit."""
    canvas = SvgCanvas()
    margin, row_h = 50.0, 36.0
    rows = list(samples.items())
    canvas.height = max(140.0, margin + row_h * (len(rows) + 1))
    for r, (label, sample) in enumerate(rows):
        y0 = margin + r * row_h
        canvas.text(8.0, y0 + 4.0, f"N={label}")
        for chain in sample.chains:
            xs = [margin + c * (canvas.width - 2 * margin)
                  for c in chain.coords]
            pts = [(x, y0 + 10.0 * k / (len(xs) or 1))
                   for k, x in enumerate(xs[:6])]
            canvas.dot(pts[0][0], pts[0][1])
            if len(pts) > 1:
                canvas.polyline(pts, color="#888", width=0.5)
    canvas.write(path)


def cmd_extend(cfg: RunConfig) -> int:
    if cfg.system == "rotation":
        g0 = cfg.tau if cfg.gamma0 is None else cfg.gamma0
        offset = int(round(g0 - (cfg.tau % 1.0)))
        h = ci.rigid_rotation(cfg.tau, offset=offset)
        shape = ci.extension_shape(h, N_max=cfg.N)
        with open(cfg.output + ".json", "w") as fh:
            json.dump(shape.to_json(), fh, indent=1)
        if cfg.format == "svg":
            canvas = SvgCanvas()
            margin, row_h = 50.0, 24.0
            canvas.height = max(140.0, margin + row_h * (cfg.N + 2))
            for N, o, e in shape.arcs:
                y = margin + N * row_h
                x0 = margin + o * (canvas.width - 2 * margin)
                x1 = margin + (e if e > o else e + 1.0) * \
                    (canvas.width - 2 * margin)
                canvas.polyline([(x0, y), (x1, y)], width=2.0)
                canvas.text(8.0, y + 4.0, f"N={N}")
            canvas.write(cfg.output + ".svg")
        print(f"extension shape: {shape.kind}, {len(shape.arcs)} arcs")
        return 0

    spec = _extension_spec_for(cfg)
    samples = {}
    doc = {}
    for N in list(range(cfg.N + 1)) + ["inf"]:
        try:
            sample = sample_stratum(spec, INF if N == "inf" else N,
                                    cfg.density, depth=cfg.depth)
        except EmptyStratum:
            doc[str(N)] = {"empty": True}
            continue
        samples[N] = sample
        doc[str(N)] = stratum_to_json(sample)
    with open(cfg.output + ".json", "w") as fh:
        json.dump(doc, fh, indent=1)
    if cfg.format == "svg":
        _ladder_svg(samples, cfg.output + ".svg")
    print(f"sampled {len(samples)} nonempty strata "
          f"({len(doc) - len(samples)} empty)")
    return 0


def _sweep_chunk(lams: np.ndarray, burn_in: int, keep: int) -> np.ndarray:
    x = np.full(lams.shape, 0.5)
    for _ in range(burn_in):
        x = 4.0 * lams * x * (1.0 - x)
    out = np.empty((keep, lams.size))
    for k in range(keep):
        x = 4.0 * lams * x * (1.0 - x)
        out[k] = x
    return out


def cmd_bifurcate(cfg: RunConfig) -> int:
    table = lg.CascadeTable.build(n_max=cfg.N_max)
    table.to_csv(cfg.output + ".csv")
    print(f"cascade table written to {cfg.output}.csv")
    if cfg.format != "svg":
        return 0
    lams = np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.steps)
    burn_in, keep = 600, 120
    workers = _thread_cap()
    chunks = np.array_split(lams, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda c: _sweep_chunk(c, burn_in, keep), chunks))
    canvas = SvgCanvas(width=800.0, height=520.0)
    margin = 40.0
    span = cfg.lambda_max - cfg.lambda_min
    for chunk, pts in zip(chunks, results):
        for j, lam in enumerate(chunk):
            px = margin + (lam - cfg.lambda_min) / span * \
                (canvas.width - 2 * margin)
            for x in pts[:, j]:
                canvas.dot(px, canvas.height - margin -
                           x * (canvas.height - 2 * margin), r=0.4)
    canvas.text(margin, canvas.height - 8.0, f"{cfg.lambda_min:.3f}")
    canvas.text(canvas.width - margin - 40.0, canvas.height - 8.0,
                f"{cfg.lambda_max:.3f}")
    canvas.write(cfg.output + ".svg")
    print(f"bifurcation diagram written to {cfg.output}.svg")
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    regime = lg.classify_regime(cfg.lam)
    doc = {"lambda": cfg.lam, "tag": regime.tag, "n": regime.n,
           "m": regime.m, "params": regime.params,
           "irreducible_continuum": regime.irreducible_continuum}
    with open(cfg.output + ".json", "w") as fh:
        json.dump(doc, fh, indent=1)
    print(f"lambda={cfg.lam}: {regime.tag}"
          + (f"(n={regime.n})" if regime.n is not None else ""))
    return 0


def cmd_continuum_graph(cfg: RunConfig) -> int:
    builders = {
        "cascade": lambda: lg.Regime.cascade_stage(cfg.n),
        "mu": lambda: lg.Regime.mu_point(cfg.n),
        "window": lambda: lg.Regime.window(cfg.n),
        "window-cascade": lambda: lg.Regime.window_cascade_stage(cfg.n, cfg.m),
    }
    if cfg.regime not in builders:
        raise ValueError(f"unknown regime {cfg.regime!r}; choose from "
                         f"{sorted(builders)}")
    graph = lg.continuum_graph(builders[cfg.regime]())
    if cfg.format == "dot":
        with open(cfg.output + ".dot", "w") as fh:
            fh.write(graph.to_dot())
    else:
        with open(cfg.output + ".json", "w") as fh:
            json.dump(graph.to_json(), fh, indent=1)
    if cfg.format == "svg":
        canvas = SvgCanvas()
        for poly in lg.bjk_embedding(resolution=max(2, min(cfg.n, 6))):
            pts = [(40.0 + x * 560.0, 440.0 - y * 400.0) for x, y in poly]
            canvas.polyline(pts, width=0.8)
        canvas.write(cfg.output + ".svg")
    print(f"{cfg.regime} graph: {len(graph.nodes)} nodes, "
          f"{len(graph.intersections)} intersections")
    return 0


def cmd_rotation(cfg: RunConfig) -> int:
    if cfg.perturbation:
        h = ci.perturbed_rotation(cfg.tau, cfg.perturbation)
    else:
        h = ci.rigid_rotation(cfg.tau)
    tau = ci.rotation_number(h, n_iter=cfg.n_iter)
    cls = ci.classify(h, n_iter=cfg.n_iter)
    case = ci.compression_case(h)
    doc = {"space": "circle", "rotation_number": tau, "kind": cls.kind,
           "m": cls.m, "n": cls.n, "compression_case": case.case,
           "evidence": cls.evidence}
    with open(cfg.output + ".json", "w") as fh:
        json.dump(doc, fh, indent=1)
    print(f"rotation number {tau:.8f} ({cls.kind})")
    return 0


def cmd_operator_check(cfg: RunConfig) -> int:
    builders = {
        "constant": lambda: om.constant_model(p=cfg.p, depth=cfg.depth),
        "rotation": lambda: om.rotation_model(tau=cfg.tau, depth=cfg.depth),
        "period3": lambda: om.logistic_period3_model(depth=cfg.depth),
    }
    if cfg.system not in builders:
        raise ValueError(f"unknown model system {cfg.system!r}; choose from "
                         f"{sorted(builders)}")
    model = builders[cfg.system]()
    report = om.full_report(model)
    report.dump(cfg.output + ".json")
    status = "all pass" if report.all_pass() else "FAILURES"
    print(f"{cfg.system} model (dim {model.dim}): {status}")
    return 0 if report.all_pass() else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--output", "-o", dest="output",
                   help="output path stem (extension added per format)")
    p.add_argument("--format", choices=["json", "csv", "svg", "dot"])


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revext",
        description="Reversible extensions of partial dynamical systems: "
                    "sampling, bifurcation analysis, and operator checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="sample extension strata")
    p.add_argument("--system", choices=["logistic", "constant", "rotation"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--p", type=float, help="constant-map target point")
    p.add_argument("--tau", type=float)
    p.add_argument("--gamma0", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--density", type=int)
    _add_common(p)

    p = sub.add_parser("bifurcate", help="cascade table and diagram")
    p.add_argument("--n-max", dest="N_max", type=int)
    p.add_argument("--lambda-min", dest="lambda_min", type=float)
    p.add_argument("--lambda-max", dest="lambda_max", type=float)
    p.add_argument("--steps", type=int)
    _add_common(p)

    p = sub.add_parser("classify", help="classify a logistic parameter")
    p.add_argument("--lambda", dest="lam", type=float)
    _add_common(p)

    p = sub.add_parser("continuum-graph",
                       help="symbolic continuum decomposition graph")
    p.add_argument("--regime",
                   choices=["cascade", "mu", "window", "window-cascade"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    _add_common(p)

    p = sub.add_parser("rotation", help="circle rotation number analysis")
    p.add_argument("--tau", type=float)
    p.add_argument("--perturbation", type=float)
    p.add_argument("--n-iter", dest="n_iter", type=int)
    _add_common(p)

    p = sub.add_parser("operator-check",
                       help="finite operator-model verification")
    p.add_argument("--system", choices=["constant", "rotation", "period3"])
    p.add_argument("--depth", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--p", type=float)
    _add_common(p)

    return parser


_DISPATCH = {
    "extend": cmd_extend,
    "bifurcate": cmd_bifurcate,
    "classify": cmd_classify,
    "continuum-graph": cmd_continuum_graph,
    "rotation": cmd_rotation,
    "operator-check": cmd_operator_check,
}


def main(argv: Optional[list] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return _DISPATCH[cfg.command](cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
