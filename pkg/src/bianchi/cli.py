"""Command line surface: single-discriminant runs, the full survey, exports.

Commands:
    domain        certified Ford domain; JSON and SVG exports
    presentation  generators, relators and the torsion summary
    homology      H1 invariants as JSON records
    survey        TSV over a discriminant range, checked against the
                  reference tables shipped with the package

Exit codes: 0 success / all rows match, 1 mismatch, 2 invalid input,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .arithmetic import make_order
from .classforms import class_number, genus_rank
from .geometry import GroupMode, ResourceCapError, ford_domain
from .homology import abelianization, cuspidal_defect, torsion_free_h1
from .poincare import (
    build_presentation,
    cusp_orbits,
    edge_cycles,
    format_presentation,
    pair_faces,
    simplify_presentation,
    singular_summary,
)
from .rational import qq_str

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3

SVG_SCALE = 400  # pixels per unit length of C


# ---------------------------------------------------------------------------
# expected tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectedRow:
    D: int
    h: int
    tag: str
    tf_rank: int
    tf_torsion: tuple
    psl_rank: Optional[int]
    defect_zero: bool


def load_expected_tables(path: Optional[str] = None) -> dict:
    if path is None:
        text = resources.files("bianchi.data").joinpath(
            "expected_tables.tsv").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        D, h, tag, tf, rank, defect0 = line.split("\t")
        rank_s, torsion_s = tf.split(";")
        torsion = tuple(int(x) for x in torsion_s.split(",") if x)
        row = ExpectedRow(int(D), int(h), tag, int(rank_s), torsion,
                          None if rank == "-" else int(rank),
                          defect0 == "1")
        out[row.D] = row
    return out


def survey_discriminants() -> list:
    return sorted(load_expected_tables(), reverse=True)


# ---------------------------------------------------------------------------
# JSON / SVG serialization
# ---------------------------------------------------------------------------


def _quad_json(x) -> list:
    return [x.a, x.b]


def _point_json(p) -> list:
    return [qq_str(p.x), qq_str(p.y)]


def _mat_json(m) -> list:
    return [[_quad_json(m.a), _quad_json(m.b)], [_quad_json(m.c), _quad_json(m.d)]]


def domain_json(dom, paired, cycles, orbits) -> dict:
    env = paired.complex
    cell = dom.cell
    return {
        "D": dom.order.D,
        "mode": dom.mode.value,
        "min_radius_sq": qq_str(dom.min_radius_sq),
        "cell": {
            "rotation_order": cell.rot_order,
            "polygon": [_point_json(p) for p in cell.polygon],
            "walls": [{
                "a": _point_json(w.a), "b": _point_json(w.b), "mate": w.mate,
                "matrix": _mat_json(w.mat),
            } for w in cell.walls],
        },
        "hemispheres": [{
            "c": _quad_json(h.c), "d": _quad_json(h.d),
            "center": _point_json(h.center), "radius_sq": qq_str(h.radius_sq),
        } for h in sorted({f.hemisphere.key(): f.hemisphere
                           for f in env.hemi_faces()}.values(),
                          key=lambda h: h.sort_key())],
        "vertices": [{
            "x": qq_str(v.point.x), "y": qq_str(v.point.y),
            "height_sq": qq_str(v.height_sq),
        } for v in env.vertices],
        "faces": [{
            "kind": f.kind,
            "polygon": list(f.polygon),
            **({"center": _point_json(f.hemisphere.center),
                "radius_sq": qq_str(f.hemisphere.radius_sq)}
               if f.kind == "hemisphere" else {"wall": f.wall.id}),
        } for f in env.faces],
        "edges": [{
            "v1": e.v1, "v2": e.v2, "kind": e.kind, "faces": list(e.faces),
        } for e in env.edges],
        "pairings": [{
            "face": p.face_id, "mate": p.mate_id, "kind": p.kind,
            "matrix": _mat_json(p.elem.mat), "word": list(p.word),
        } for p in paired.pairings],
        "cycles": [{
            "edges": list(c.edge_ids), "order": c.order, "word": list(c.word),
            "matrix": _mat_json(c.elem.mat),
        } for c in cycles],
        "ideal_vertices": sorted(env.ideal_vertex_ids()),
        "cusp_orbits": {
            "count": orbits.count,
            "orbits": [sorted(o) for o in orbits.orbits],
            "class_tags": list(orbits.class_tags),
        },
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


_FACE_COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
                "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac"]


def domain_svg(dom, paired) -> str:
    """Projected envelope: faces colored by norm(c), cell outline, cusps."""
    env = paired.complex
    order = dom.order
    s = math.sqrt(order.abs_D)

    def proj(p) -> tuple:
        return (SVG_SCALE * float(p.x), -SVG_SCALE * float(p.y) * s)

    xs, ys = [], []
    for p in dom.cell.polygon:
        x, y = proj(p)
        xs.append(x)
        ys.append(y)
    pad = 12.0
    x0, y0 = min(xs) - pad, min(ys) - pad
    wd, ht = max(xs) - min(xs) + 2 * pad, max(ys) - min(ys) + 2 * pad

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.2f} {y0:.2f} '
        f'{wd:.2f} {ht:.2f}" width="{wd:.0f}" height="{ht:.0f}">',
        f"<!-- Ford domain floor, D={order.D}, {dom.mode.value} -->",
    ]
    norms = sorted({f.hemisphere.c.norm() for f in env.hemi_faces()})
    color_of = {n: _FACE_COLORS[i % len(_FACE_COLORS)] for i, n in enumerate(norms)}
    for f in env.hemi_faces():
        pts = " ".join(f"{proj(env.point(v))[0]:.3f},{proj(env.point(v))[1]:.3f}"
                       for v in f.polygon)
        color = color_of[f.hemisphere.c.norm()]
        parts.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.55" '
                     f'stroke="#333333" stroke-width="1"/>')
    outline = " ".join(f"{proj(p)[0]:.3f},{proj(p)[1]:.3f}" for p in dom.cell.polygon)
    parts.append(f'<polygon points="{outline}" fill="none" stroke="#000000" '
                 f'stroke-width="2"/>')
    for vid in sorted(env.ideal_vertex_ids()):
        x, y = proj(env.point(vid))
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="5" fill="#d62728"/>')
    legend = ", ".join(f"norm {n}: {color_of[n]}" for n in norms)
    parts.append(f"<!-- face colors by norm(c): {legend} -->")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# survey
# ---------------------------------------------------------------------------


@dataclass
class SurveyRow:
    D: int
    h_forms: int
    cusps: int
    pgl_tf: object
    psl_h1: object
    defect: int
    expected_tag: str
    match: bool
    detail: str


def compute_survey_row(D: int, expected: ExpectedRow,
                       max_norm: Optional[int] = None) -> SurveyRow:
    order = make_order(D)
    h = class_number(order)
    problems = []
    if h != expected.h:
        problems.append(f"h={h}!={expected.h}")
    if genus_rank(order) != _genus_from_ambiguous(order):
        problems.append("genus-rank")

    results = {}
    for mode in (GroupMode.PGL, GroupMode.PSL):
        dom = ford_domain(order, mode, max_norm=max_norm)
        paired = pair_faces(dom)
        cycles = edge_cycles(paired)
        pres = build_presentation(dom, paired, cycles)
        orb = cusp_orbits(dom, paired)
        results[mode] = (pres, orb)
        if orb.count != h:
            problems.append(f"cusps[{mode.value}]={orb.count}!={h}")

    tf = torsion_free_h1(results[GroupMode.PGL][0])
    if (tf.free_rank, tf.torsion) != (expected.tf_rank, expected.tf_torsion):
        problems.append(f"tfH1={tf}")
    psl_ab = abelianization(results[GroupMode.PSL][0])
    if expected.psl_rank is not None and psl_ab.free_rank != expected.psl_rank:
        problems.append(f"pslRank={psl_ab.free_rank}!={expected.psl_rank}")
    s = cuspidal_defect(D, psl_ab, results[GroupMode.PSL][1].count)
    if (s == 0) != expected.defect_zero:
        problems.append(f"defect={s}")

    return SurveyRow(D, h, results[GroupMode.PGL][1].count, tf, psl_ab, s,
                     expected.tag, not problems, ";".join(problems))


def _genus_from_ambiguous(order) -> int:
    from .classforms import ambiguous_form_two_rank

    return ambiguous_form_two_rank(order)


def _survey_worker(args):
    D, expected, max_norm = args
    return compute_survey_row(D, expected, max_norm)


def run_survey(d_from: int, d_to: int, jobs: int = 1,
               max_norm: Optional[int] = None,
               expected_path: Optional[str] = None) -> list:
    tables = load_expected_tables(expected_path)
    lo, hi = min(d_from, d_to), max(d_from, d_to)
    ds = [D for D in sorted(tables, reverse=True) if lo <= D <= hi]
    work = [(D, tables[D], max_norm) for D in ds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_survey_worker, work))
    else:
        rows = [_survey_worker(w) for w in work]
    rows.sort(key=lambda r: -r.D)
    return rows


def format_survey_tsv(rows) -> str:
    header = "D\th\tcusps\tpgl_tf_h1\tpsl_h1\tdefect\texpected\tmatch\n"
    lines = [header]
    for r in rows:
        lines.append(f"{r.D}\t{r.h_forms}\t{r.cusps}\t{r.pgl_tf}\t{r.psl_h1}\t"
                     f"{r.defect}\t{r.expected_tag}\t"
                     f"{'ok' if r.match else r.detail}\n")
    return "".join(lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _parse_order_or_exit(D: int):
    try:
        return make_order(D)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def cmd_domain(args) -> int:
    order = _parse_order_or_exit(args.D)
    try:
        dom = ford_domain(order, args.mode, max_norm=args.max_norm)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    paired = pair_faces(dom)
    cycles = edge_cycles(paired)
    orbits = cusp_orbits(dom, paired)
    print(f"D={order.D} mode={dom.mode.value}: certified at min_radius_sq="
          f"{dom.min_radius_sq}; {len(paired.complex.hemi_faces())} floor faces, "
          f"{len(paired.complex.wall_faces())} walls, {orbits.count} cusps")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(domain_json(dom, paired, cycles, orbits)))
        print(f"wrote {args.json}")
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(domain_svg(dom, paired))
        print(f"wrote {args.svg}")
    return EXIT_OK


def cmd_presentation(args) -> int:
    order = _parse_order_or_exit(args.D)
    try:
        dom = ford_domain(order, args.mode, max_norm=args.max_norm)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    paired = pair_faces(dom)
    cycles = edge_cycles(paired)
    pres = build_presentation(dom, paired, cycles)
    if args.simplify:
        pres = simplify_presentation(pres)
    sys.stdout.write(format_presentation(pres))
    print("# all relators verified scalar [ok]")
    summary = singular_summary(cycles, paired)
    counts = " ".join(f"{n}:{c}" for n, c in sorted(summary.cycle_orders.items()))
    print(f"# torsion cycle orders: {counts or 'none'}")
    if summary.finite_order_generators:
        gens = " ".join(f"{name}^{n}" for name, n in summary.finite_order_generators)
        print(f"# finite order generators: {gens}")
    return EXIT_OK


def cmd_homology(args) -> int:
    order = _parse_order_or_exit(args.D)
    try:
        dom = ford_domain(order, args.mode, max_norm=args.max_norm)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    pres = build_presentation(dom)
    for group, inv in (("h1", abelianization(pres)),
                       ("h1_mod_torsion", torsion_free_h1(pres))):
        print(json.dumps({"D": order.D, "mode": dom.mode.value, "group": group,
                          "rank": inv.free_rank,
                          "torsion": list(inv.torsion)}, sort_keys=True))
    return EXIT_OK


def cmd_survey(args) -> int:
    try:
        rows = run_survey(args.d_from, args.d_to, jobs=args.jobs,
                          max_norm=args.max_norm, expected_path=args.expected)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    text = format_survey_tsv(rows)
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.tsv} ({len(rows)} rows)")
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if not r.match]
    if bad:
        print(f"{len(bad)} rows failed: {[r.D for r in bad]}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bianchi",
        description="Ford domains, presentations and homology for Bianchi groups")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-D", type=int, required=True, help="discriminant (negative)")
        p.add_argument("--mode", choices=["pgl", "psl"], default="pgl")
        p.add_argument("--max-norm", type=int, default=None,
                       help="resource cap on norm(c); default 10*|D|")

    p = sub.add_parser("domain", help="compute a certified Ford domain")
    common(p)
    p.add_argument("--json", metavar="PATH", help="write the domain as JSON")
    p.add_argument("--svg", metavar="PATH", help="write the projected floor as SVG")
    p.set_defaults(func=cmd_domain)

    p = sub.add_parser("presentation", help="print the group presentation")
    common(p)
    p.add_argument("--simplify", action="store_true",
                   help="eliminate generators expressible in the others")
    p.set_defaults(func=cmd_presentation)

    p = sub.add_parser("homology", help="print H1 invariants as JSON records")
    common(p)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("survey", help="verify the reference tables over a range")
    p.add_argument("--from", dest="d_from", type=int, default=-95)
    p.add_argument("--to", dest="d_to", type=int, default=-3)
    p.add_argument("--tsv", metavar="PATH", help="write rows to a TSV file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-norm", type=int, default=None)
    p.add_argument("--expected", metavar="PATH", default=None,
                   help="override the packaged expectation table")
    p.set_defaults(func=cmd_survey)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
