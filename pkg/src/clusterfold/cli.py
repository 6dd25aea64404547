"""Command line driver: ``clusterfold {scatter,fold,theta,dt,verify,render}``.

Exit codes are 0 on success, 2 when a verification does not match and 3 for
bad input (unreadable files, inadmissible actions, unsupported seeds).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .atlas import NotGreenError, dt_transform, find_maximal_green_sequence
from .folding import (
    AdmissibilityError,
    GroupAction,
    action_from_json,
    fixture_action,
    fold_diagram,
    fold_seed,
    q_tilde,
    verify_folded_equivalence,
)
from .lattice_core import FIXTURE_NAMES, Seed, fixture_seed
from .poly import LaurentExpr
from .reference import S24_GREEN_SEQUENCE
from .scattering import (
    NotFiniteTypeError,
    ScatteringDiagram,
    cluster_walls,
    complete_rank2,
    finite_type_diagram,
    initial_diagram,
)
from .theta import GENERIC_Q, markov_theta, theta_expand

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 2, 3


class InputError(ValueError):
    """Bad command line input; reported with exit code 3."""


@dataclass
class RunConfig:
    subcommand: str
    seed_file: str | None = None
    action_file: str | None = None
    order: int = 8
    depth: int = 2
    out: str | None = None
    sample_seed: int = 0
    plane: str = "1,1,1"
    sequence: str | None = None
    p0: str | None = None
    index: int | None = None
    diagram_file: str | None = None
    criteria: str | None = None

    def __post_init__(self):
        if self.order < 1:
            raise InputError("--order must be at least 1")
        if self.depth < 0:
            raise InputError("--depth must be nonnegative")


# loading


def load_seed(spec: str | None) -> Seed:
    if not spec:
        raise InputError("--seed-file is required")
    if spec in FIXTURE_NAMES:
        return fixture_seed(spec)
    try:
        return Seed.load(spec)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read seed {spec!r}: {exc}") from exc


def load_action(seed: Seed, spec: str | None) -> GroupAction:
    if not spec:
        raise InputError("--action-file is required")
    if not Path(spec).exists():
        try:
            return fixture_action(seed, spec)
        except KeyError as exc:
            raise InputError(f"no action file or fixture named {spec!r}") from exc
    try:
        data = json.loads(Path(spec).read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read action {spec!r}: {exc}") from exc
    return action_from_json(seed, data)


def _ints(text: str | None, what: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except (AttributeError, ValueError) as exc:
        raise InputError(f"{what} must be a comma separated list of integers") from exc


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=str) + "\n"


def emit(cfg: RunConfig, payload) -> None:
    text = payload if isinstance(payload, str) else dumps(payload)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_diagram(seed: Seed, order: int, depth: int | None = None) -> tuple[ScatteringDiagram, str]:
    """Finite type when the mutation tree closes, else the rank 2 completion."""
    try:
        return finite_type_diagram(seed, order), "finite_type"
    except NotFiniteTypeError:
        if seed.rank == 2:
            return complete_rank2(initial_diagram(seed, order), order), "rank2_completion"
        raise


# subcommands


def cmd_scatter(cfg: RunConfig) -> int:
    seed = load_seed(cfg.seed_file)
    try:
        d, method = build_diagram(seed, cfg.order)
    except NotFiniteTypeError as exc:
        raise InputError(f"{exc}; only finite type or rank 2 seeds can be completed") from exc
    out = {"seed": seed.to_json(), "method": method}
    out.update(d.to_json())
    emit(cfg, out)
    print(f"{method}: {len(out['walls'])} walls at order {cfg.order}", file=sys.stderr)
    return EXIT_OK


def cmd_fold(cfg: RunConfig) -> int:
    seed = load_seed(cfg.seed_file)
    fm = fold_seed(load_action(seed, cfg.action_file))
    try:
        source, method = build_diagram(seed, cfg.order)
    except NotFiniteTypeError:
        source, method = initial_diagram(seed, cfg.order), "initial"
    fd = fold_diagram(fm, source)
    if method == "initial":
        report = {"walls": len(fd.walls), "note": "infinite type: only the initial walls are folded"}
        ok = True
    else:
        ok, report = verify_folded_equivalence(fm, source, cfg.order, folded=fd, sample_seed=cfg.sample_seed)
    out = {
        "source_method": method,
        "folded_seed": fm.target.to_json(),
        "orbits": [[i + 1 for i in o] for o in fm.action.orbits],
        "report": report,
    }
    out.update(fd.canonical().to_json())
    emit(cfg, out)
    summary = ", ".join(f"{k}: {str(v).lower()}" for k, v in report.items() if isinstance(v, bool))
    print(f"folded {seed.rank} -> {fm.rank}; {summary}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_theta(cfg: RunConfig) -> int:
    seed = load_seed(cfg.seed_file)
    if cfg.index is not None:
        if not 1 <= cfg.index <= seed.rank:
            raise InputError(f"--index must be in 1..{seed.rank}")
        th = markov_theta(seed, cfg.index - 1, cfg.order)
    else:
        if seed.rank != 2:
            raise InputError("theta with --p0 needs a rank 2 seed; use --index for sub-seed thetas")
        p0 = _ints(cfg.p0 or "1,0", "--p0")
        if len(p0) == 2:
            p0 += [0, 0]
        if len(p0) != 4:
            raise InputError("--p0 takes 2 or 4 integers")
        d, _ = build_diagram(seed, cfg.order)
        th = theta_expand(d, p0, GENERIC_Q, cfg.order)
    out = th.to_json()
    out["positive"] = th.poly.is_positive()
    emit(cfg, out)
    print(f"theta {list(th.p0)}: {len(th.poly)} terms from {len(th.lines)} broken lines", file=sys.stderr)
    return EXIT_OK


def cmd_dt(cfg: RunConfig) -> int:
    seed = load_seed(cfg.seed_file)
    r = seed.rank
    if cfg.sequence:
        seq = _ints(cfg.sequence, "--sequence")
    elif cfg.seed_file == "s_S24":
        seq = list(S24_GREEN_SEQUENCE)
    else:
        found = find_maximal_green_sequence(seed, max(cfg.depth, 2 * r + 2))
        if found is None:
            raise InputError("no maximal green sequence found; pass --sequence")
        seq = list(found)
    try:
        dt = dt_transform(seed, seq)
    except NotGreenError as exc:
        raise InputError(str(exc)) from exc
    fm = fold_seed(load_action(seed, cfg.action_file)) if cfg.action_file else None
    images = []
    for i in range(r):
        if fm is not None and fm.action.orbits[fm.action.orbit_index[i]][0] != i:
            continue
        unit = tuple(int(j == i) for j in range(2 * r))
        img = dt.apply(LaurentExpr.monomial(unit))
        F = img * LaurentExpr.monomial(unit)
        entry = {"index": i + 1, "image": img.to_json(), "F": F.to_json(), "F_terms": len(F)}
        if fm is not None:
            fi = q_tilde(fm, F)
            entry.update({"folded_F": fi.to_json(), "folded_F_terms": len(fi)})
        images.append(entry)
    emit(cfg, {"sequence": seq, "transforms": images})
    for e in images:
        extra = f", folded {e['folded_F_terms']} terms" if fm else ""
        print(f"F_{e['index']}: {e['F_terms']} terms{extra}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .checks import CHECKS, run_check

    wanted = _ints(cfg.criteria, "--criteria") if cfg.criteria else [n for n, *_ in CHECKS]
    results = [run_check(n) for n in wanted]
    for res in results:
        print(res.line(), file=sys.stderr)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=sys.stderr)
    emit(cfg, {"results": [r.to_json(timing=False) for r in results], "passed": passed, "total": len(results)})
    return EXIT_OK if passed == len(results) else EXIT_MISMATCH


def cmd_render(cfg: RunConfig) -> int:
    seed = load_seed(cfg.seed_file)
    if cfg.diagram_file:
        try:
            d = ScatteringDiagram.from_json(seed, json.loads(Path(cfg.diagram_file).read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read diagram {cfg.diagram_file!r}: {exc}") from exc
    elif seed.rank == 2:
        d, _ = build_diagram(seed, cfg.order)
    elif seed.rank == 3:
        d = cluster_walls(seed, cfg.order, cfg.depth)
    else:
        raise InputError(f"render supports rank 2 and 3, not {seed.rank}")
    if d.rank == 2:
        segments, extent = rank2_segments(d), EXTENT
    elif d.rank == 3:
        segments, extent = plane_segments(d, _plane(cfg.plane))
    else:
        raise InputError(f"render supports rank 2 and 3, not {d.rank}")
    emit(cfg, render_svg(segments, f"{len(d.nontrivial())} walls, order {d.order}", extent))
    return EXIT_OK


# rendering

Segment = tuple[tuple[float, float], tuple[float, float], tuple[int, ...]]
EXTENT = 3.0


def _plane(text: str) -> tuple[Fraction, ...]:
    vals = _ints(text, "--plane")
    if len(vals) != 3 or not any(vals):
        raise InputError("--plane takes the three coefficients a,b,c of ax+by+cz=1")
    return tuple(Fraction(v) for v in vals)


def _generators(cone) -> list[tuple[Fraction, ...]]:
    gens = [tuple(Fraction(x) for x in g) for g in cone.rays]
    for g in cone.lineality:
        g = tuple(Fraction(x) for x in g)
        gens += [g, tuple(-x for x in g)]
    return gens


def rank2_segments(d: ScatteringDiagram) -> list[Segment]:
    out = []
    for w in d.nontrivial():
        for g in _generators(w.support):
            norm = math.hypot(*(float(x) for x in g))
            end = tuple(EXTENT * float(x) / norm for x in g)
            out.append(((0.0, 0.0), end, w.n0))
    return out


def plane_segments(d: ScatteringDiagram, h: Sequence[Fraction]) -> tuple[list[Segment], float]:
    """Traces of the walls on the affine plane ``h(x) = 1`` and a view extent."""
    hv = lambda v: sum(a * b for a, b in zip(h, v))
    # orthonormal coordinates on the plane, centred at its closest point to 0
    hn = [float(x) for x in h]
    hh = sum(x * x for x in hn)
    center = [x / hh for x in hn]
    u = _orthonormal(hn)
    traces = []
    for w in d.nontrivial():
        gens = _generators(w.support)
        pts = [tuple(x / hv(g) for x in g) for g in gens if hv(g) > 0]
        if not pts:
            continue
        dirs = [g for g in gens if hv(g) == 0]
        for g in gens:
            if hv(g) < 0:
                p = next(p for p in gens if hv(p) > 0)
                dirs.append(tuple(a - hv(g) / hv(p) * b for a, b in zip(g, p)))
        flat = [_project([float(x) for x in p], center, u) for p in pts]
        flat_dirs = [_project([float(x) for x in v], [0.0] * 3, u) for v in dirs]
        traces.append((flat, flat_dirs, w.n0))
    reach = max((abs(c) for flat, _, _ in traces for p in flat for c in p), default=0.0)
    extent = 1.5 * reach if reach > 0 else 1.0
    out = []
    for flat, flat_dirs, n0 in traces:
        a, b = _interval(flat, flat_dirs, extent)
        if a is not None:
            out.append((a, b, n0))
    return out, extent


def _orthonormal(n: list[float]) -> list[list[float]]:
    trial = [1.0, 0.0, 0.0] if abs(n[0]) < 0.9 * math.sqrt(sum(x * x for x in n)) else [0.0, 1.0, 0.0]
    nn = math.sqrt(sum(x * x for x in n))
    nu = [x / nn for x in n]
    t = sum(a * b for a, b in zip(trial, nu))
    u1 = [a - t * b for a, b in zip(trial, nu)]
    l1 = math.sqrt(sum(x * x for x in u1))
    u1 = [x / l1 for x in u1]
    u2 = [nu[1] * u1[2] - nu[2] * u1[1], nu[2] * u1[0] - nu[0] * u1[2], nu[0] * u1[1] - nu[1] * u1[0]]
    return [u1, u2]


def _project(p: list[float], center: list[float], u: list[list[float]]) -> tuple[float, float]:
    q = [a - b for a, b in zip(p, center)]
    return (sum(a * b for a, b in zip(q, u[0])), sum(a * b for a, b in zip(q, u[1])))


def _interval(pts, dirs, extent: float = EXTENT):
    """Endpoints of ``conv(pts) + cone(dirs)`` on a line, clipped near ``extent``."""
    axis = None
    for v in dirs:
        if math.hypot(*v) > 1e-12:
            axis = v
            break
    if axis is None:
        far = max(((p, q) for p in pts for q in pts), key=lambda pq: math.dist(*pq))
        if math.dist(*far) < 1e-12:
            return None, None
        axis = (far[1][0] - far[0][0], far[1][1] - far[0][1])
    n = math.hypot(*axis)
    axis = (axis[0] / n, axis[1] / n)
    base = pts[0]
    proj = [(p[0] - base[0]) * axis[0] + (p[1] - base[1]) * axis[1] for p in pts]
    lo, hi = min(proj), max(proj)
    for v in dirs:
        s = v[0] * axis[0] + v[1] * axis[1]
        if s > 1e-12:
            hi = math.inf
        elif s < -1e-12:
            lo = -math.inf
    lo, hi = max(lo, -2 * extent), min(hi, 2 * extent)
    at = lambda s: (base[0] + s * axis[0], base[1] + s * axis[1])
    return at(lo), at(hi)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def render_svg(segments: list[Segment], caption: str = "", extent: float = EXTENT, size: int = 480) -> str:
    scale = size / (2.2 * extent)
    c = size / 2

    def xy(p):
        return f'x1="{c + scale * p[0]:.3f}" y1="{c - scale * p[1]:.3f}"'

    def xy2(p):
        return f'x2="{c + scale * p[0]:.3f}" y2="{c - scale * p[1]:.3f}"'

    normals = sorted({s[2] for s in segments})
    colour = {n: _PALETTE[i % len(_PALETTE)] for i, n in enumerate(normals)}
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<clipPath id="view"><rect width="{size}" height="{size}"/></clipPath>',
        f'<line {xy((-extent, 0))} {xy2((extent, 0))} stroke="#bbb" stroke-width="1"/>',
        f'<line {xy((0, -extent))} {xy2((0, extent))} stroke="#bbb" stroke-width="1"/>',
        '<g clip-path="url(#view)">',
    ]
    for a, b, n0 in sorted(segments, key=lambda s: (s[2], s[0], s[1])):
        label = ",".join(str(x) for x in n0)
        lines.append(
            f'<line {xy(a)} {xy2(b)} stroke="{colour[n0]}" stroke-width="2"><title>n0=({label})</title></line>'
        )
    lines.append("</g>")
    if caption:
        lines.append(f'<text x="8" y="{size - 8}" font-family="sans-serif" font-size="12">{caption}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "scatter": cmd_scatter,
    "fold": cmd_fold,
    "theta": cmd_theta,
    "dt": cmd_dt,
    "verify": cmd_verify,
    "render": cmd_render,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clusterfold", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "scatter": "consistent scattering diagram of a seed as JSON",
        "fold": "fold a diagram by a group action and verify it",
        "theta": "theta function expansion by broken lines",
        "dt": "DT transformation from a maximal green sequence",
        "verify": "run the reproduction checks",
        "render": "SVG of wall traces (rank 2, or rank 3 on a plane)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--seed-file", help=f"seed JSON path or fixture name ({', '.join(FIXTURE_NAMES)})")
        p.add_argument("--order", type=int, default=8)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--sample-seed", type=int, default=0)
        if name in ("fold", "dt"):
            p.add_argument("--action-file", help="action JSON path or fixture name (pi_A3, pi_S24, ...)")
        if name == "dt":
            p.add_argument("--sequence", help="1-based maximal green sequence, e.g. 1,2,1")
            p.add_argument("--depth", type=int, default=8, help="search bound when no sequence is given")
        if name == "theta":
            p.add_argument("--p0", help="initial exponent m in f-coordinates, e.g. --p0=-1,0 (rank 2 seeds)")
            p.add_argument("--index", type=int, help="theta of f_i - f_(i+1) on a rank 2 sub-seed, 1-based")
        if name == "render":
            p.add_argument("--depth", type=int, default=2, help="mutation depth for rank 3 walls")
            p.add_argument("--plane", default="1,1,1", help="a,b,c for the plane ax+by+cz=1")
            p.add_argument("--diagram-file", help="render this diagram JSON instead")
        if name == "verify":
            p.add_argument("--criteria", help="comma separated subset, e.g. 1,4,7")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
        return COMMANDS[cfg.subcommand](cfg)
    except AdmissibilityError as exc:
        print(dumps({"error": "inadmissible action", "message": str(exc), "witness": getattr(exc, "witness", None)}), file=sys.stderr)
        return EXIT_INPUT
    except (InputError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
