"""Command-line front end.

    mabravo SITES AOI_POINTS SEED                      graphical: one run, SVG scene
    mabravo SITES AOI_POINTS ROUTES NETWORKS SEED      batch: CSV rows + CDF summary

Exit status: 0 all checks passed, 1 some check failed, 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from typing import Sequence, TextIO

from . import geometry as geo
from .errors import InvalidInputError
from .geometry import Box, Point
from .sim import (
    ExperimentConfig,
    RunRecord,
    build_cdf,
    generate_network,
    network_streams,
    run_experiment,
    run_route,
    sample_point_in_aoi,
    verify_run,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

CSV_HEADER = (
    "network", "route", "start_site", "end_site", "total_sites", "aoi_sites",
    "oracle_unicast_hops", "oracle_avg_depth", "mabravo_r_avg_depth",
    "mabravo_d_hops", "messages_sent", "checks_passed",
)

# SVG palette
AOI_COLOR = "red"
IN_AOI_COLOR = "green"
OUT_AOI_COLOR = "blue"
SEGMENT_COLOR = "magenta"
ROUTE_COLOR = "cyan"

log = logging.getLogger("mabravo")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mabravo",
        description="MABRAVO unicast / AoI-cast simulator on Voronoi overlays.",
        epilog="3 values: SITES AOI_POINTS SEED (graphical, SVG).  "
               "5 values: SITES AOI_POINTS ROUTES NETWORKS SEED (batch, CSV).",
    )
    p.add_argument("params", nargs="*", metavar="N", help="positional integer parameters")
    p.add_argument("--world-min", type=float, default=0.0, help="lower corner of the square world (default 0)")
    p.add_argument("--world-max", type=float, default=1000.0, help="upper corner of the square world (default 1000)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="geometric tolerance (default 1e-9 x world diagonal)")
    p.add_argument("--out", default=None, help="output file (SVG or CSV); stdout when omitted")
    p.add_argument("--no-verify", action="store_true", help="skip post-hoc checks")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch mode")
    p.add_argument("--literal-guard", action="store_true",
                   help="use the competitor guard exactly as printed in the published pseudocode")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _ints(raw: Sequence[str]) -> list[int]:
    out = []
    for s in raw:
        try:
            out.append(int(s))
        except ValueError:
            raise UsageError(f"not an integer: {s!r}") from None
    return out


# --------------------------------------------------------------------------
# graphical mode

def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_svg(network, artifacts, route_line: tuple[Point, Point]) -> str:
    """Deterministic SVG scene; the y axis is flipped so north is up."""
    w = network.diagram.world
    pad = 0.02 * max(w.width, w.height)
    sw = 0.001 * w.diagonal

    def xy(p) -> str:
        return f"{_f(p[0])},{_f(w.ymax + w.ymin - p[1])}"

    def poly(verts, color: str, width: float) -> str:
        pts = " ".join(xy(v) for v in verts)
        return f'<polygon points="{pts}" fill="none" stroke="{color}" stroke-width="{_f(width)}"/>'

    vb = f"{_f(w.xmin - pad)} {_f(w.ymin - pad)} {_f(w.width + 2 * pad)} {_f(w.height + 2 * pad)}"
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}" width="800" height="800">',
        f'<rect x="{_f(w.xmin - pad)}" y="{_f(w.ymin - pad)}" width="{_f(w.width + 2 * pad)}" '
        f'height="{_f(w.height + 2 * pad)}" fill="white"/>',
        '<g id="cells">',
    ]
    members = network.members
    for sid in sorted(network.diagram.cells):
        cell = network.diagram.cells[sid]
        color = IN_AOI_COLOR if sid in members else OUT_AOI_COLOR
        lines.append(poly(cell.polygon.vertices, color, sw))
    lines.append("</g>")
    lines.append('<g id="sites">')
    for sid in sorted(network.diagram.cells):
        p = network.diagram.position(sid)
        x, y = xy(p).split(",")
        lines.append(f'<circle cx="{x}" cy="{y}" r="{_f(2 * sw)}" fill="black"/>')
    lines.append("</g>")
    lines.append(f'<g id="aoi">{poly(network.aoi.vertices, AOI_COLOR, 2 * sw)}</g>')
    a, b = route_line
    (x1, y1), (x2, y2) = xy(a).split(","), xy(b).split(",")
    lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{SEGMENT_COLOR}" '
                 f'stroke-width="{_f(2 * sw)}"/>')
    lines.append('<g id="route">')
    for sid in artifacts.unicast.route:
        x, y = xy(network.diagram.position(sid)).split(",")
        lines.append(f'<circle cx="{x}" cy="{y}" r="{_f(8 * sw)}" fill="none" stroke="{ROUTE_COLOR}" '
                     f'stroke-width="{_f(2 * sw)}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def run_graphical(config: ExperimentConfig, *, verify: bool, guard) -> tuple[str, str, bool]:
    """Network 0 and its first route: (svg, summary text, all checks passed)."""
    topo, routes = network_streams(config.master_seed, 0)
    net = generate_network(topo, config)
    src = sample_point_in_aoi(routes, net.aoi)
    dst = sample_point_in_aoi(routes, net.aoi)
    record, artifacts = run_route(net, src, dst, verify=False, guard=guard)
    svg = render_svg(net, artifacts, (src, dst))

    out = io.StringIO()
    route = artifacts.unicast.route
    print(f"sites: {record.total_sites}  aoi sites: {record.aoi_sites}", file=out)
    print(f"route: {' -> '.join(map(str, route))}  ({record.mabravo_d_hops} hops, "
          f"oracle {record.oracle_unicast_hops})", file=out)
    print(f"aoi-cast root {record.end_site_or_root}: {record.messages_sent} messages, "
          f"avg depth {record.mabravo_r_avg_depth:.3f} (oracle {record.oracle_avg_depth:.3f})", file=out)
    ok = True
    if verify:
        for r in verify_run(artifacts, net.diagram, net.aoi, members=net.members, vision=net.vision):
            ok &= r.passed
            print(f"check {r.name}: {'pass' if r.passed else 'FAIL ' + r.detail}", file=out)
    else:
        print("checks: skipped", file=out)
    return svg, out.getvalue(), ok


# --------------------------------------------------------------------------
# batch mode

def _csv_row(r: RunRecord) -> list[str]:
    return [
        str(r.network_index), str(r.route_index), str(r.start_site), str(r.end_site_or_root),
        str(r.total_sites), str(r.aoi_sites), str(r.oracle_unicast_hops),
        f"{r.oracle_avg_depth:.6f}", f"{r.mabravo_r_avg_depth:.6f}",
        str(r.mabravo_d_hops), str(r.messages_sent),
        ("true" if r.checks_passed else "false") if r.verified else "",
    ]


def summary_block(records: Sequence[RunRecord], verified: bool) -> str:
    out = io.StringIO()
    failed = sum(1 for r in records if not r.checks_passed)
    print(f"# runs: {len(records)}", file=out)
    if verified:
        print(f"# runs with failed checks: {failed}", file=out)
    print("# avg depth: mean tree depth over delivered sites, root included at depth 0", file=out)
    print(f"# {'metric':<22} {'p10':>10} {'p50':>10} {'p90':>10}", file=out)
    series = {
        "mabravo_d_hops": [r.mabravo_d_hops for r in records],
        "oracle_unicast_hops": [r.oracle_unicast_hops for r in records],
        "mabravo_r_avg_depth": [r.mabravo_r_avg_depth for r in records],
        "oracle_avg_depth": [r.oracle_avg_depth for r in records],
    }
    for name, vals in series.items():
        cdf = build_cdf(vals)
        q = [cdf.quantile(p) for p in (0.1, 0.5, 0.9)]
        print(f"# {name:<22} " + " ".join(f"{v:>10.3f}" for v in q), file=out)
    return out.getvalue()


def write_batch(config: ExperimentConfig, stream: TextIO, *, verify: bool, guard, jobs: int = 1) -> list[RunRecord]:
    """Stream CSV rows in (network, route) order; returns the records."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    records = []
    for r in run_experiment(config, verify=verify, guard=guard, jobs=jobs):
        w.writerow(_csv_row(r))
        records.append(r)
    return records


# --------------------------------------------------------------------------

def _open_out(path: str | None) -> TextIO:
    if path is None:
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def main(argv: Sequence[str] | None = None) -> int:
    # the tolerance is process-wide; leave it as found for in-process callers
    saved = geo.current_tolerance()
    try:
        return _main(argv)
    finally:
        geo.set_tolerance(saved)


def _main(argv: Sequence[str] | None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    guard = "literal" if args.literal_guard else "candidate"
    try:
        vals = _ints(args.params)
        if len(vals) not in (3, 5):
            raise UsageError(f"expected 3 (graphical) or 5 (batch) parameters, got {len(vals)}")
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        world = Box(args.world_min, args.world_min, args.world_max, args.world_max)
        eps = geo.tolerance_for_box(world) if args.epsilon is None else geo.Tolerance(args.epsilon)
        geo.set_tolerance(eps)
        if len(vals) == 3:
            config = ExperimentConfig(vals[0], vals[1], 1, 1, vals[2], world)
        else:
            config = ExperimentConfig(vals[0], vals[1], vals[2], vals[3], vals[4], world)
    except (UsageError, InvalidInputError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"mabravo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        stream = _open_out(args.out)
    except OSError as exc:
        print(f"mabravo: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO

    # human-readable text goes to stderr whenever stdout carries the data
    text = sys.stderr if stream is sys.stdout else sys.stdout
    try:
        if len(vals) == 3:
            svg, summary, ok = run_graphical(config, verify=not args.no_verify, guard=guard)
            stream.write(svg)
            text.write(summary)
        else:
            records = write_batch(config, stream, verify=not args.no_verify, guard=guard, jobs=args.jobs)
            stream.flush()
            text.write(summary_block(records, not args.no_verify))
            ok = all(r.checks_passed for r in records) if not args.no_verify else True
        stream.flush()
    except OSError as exc:
        print(f"mabravo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInputError as exc:
        print(f"mabravo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
