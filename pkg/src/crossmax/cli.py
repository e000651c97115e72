"""``crossmax`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import bench, imgcodec, polylsq
from .cross import bound_certificate, build_cross
from .densemat import read_csv
from .errors import CrossmaxError
from .maxvol import MaxvolConfig, maxvol

log = logging.getLogger("crossmax")

# fixed key sets of every JSON document the CLI emits
CROSS_KEYS = ("rank", "indices", "chebyshevError", "classicBound", "improvedBound", "nu")
COMPRESS_KEYS = ("width", "height", "rank", "storedEntries", "ratio", "psnr", "bytes", "probes")
DECOMPRESS_KEYS = ("width", "height", "rank", "psnr")
LSQ_KEYS = ("function", "degree", "method", "basisSize", "relError", "pivotalRows",
            "coefficients", "boundTerms")


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _dump(doc: dict, target: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _h_list(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok == "r":
            out.append("r")
        else:
            try:
                out.append(int(tok))
            except ValueError:
                raise argparse.ArgumentTypeError(f"h values are integers or 'r', got {tok!r}") from None
    return out


def _default_seed() -> int:
    env = os.environ.get("CROSSMAX_SEED")
    return int(env) if env else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help="RNG seed (default: $CROSSMAX_SEED or 0)")
    common.add_argument("--eps", type=float, default=1e-2, help="dominance slack epsilon")
    common.add_argument("--max-sweeps", type=int, default=200)
    common.add_argument("--verbose", action="store_true")

    single_h = argparse.ArgumentParser(add_help=False)
    single_h.add_argument("--h", type=int, default=1, help="greedy width")

    parser = argparse.ArgumentParser(prog="crossmax", description="Cross approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cross", parents=[common, single_h], help="cross approximation of a CSV matrix")
    p.add_argument("--input", required=True, help="headerless CSV matrix")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--report", help="write the JSON report here instead of stdout")

    p = sub.add_parser("compress", parents=[common, single_h], help="PGM -> XCUR")
    p.add_argument("input")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--psnr", type=float)
    target.add_argument("--rank", type=int)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("decompress", parents=[common], help="XCUR -> PGM")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--ref", help="reference PGM for PSNR")

    p = sub.add_parser("lsq-demo", parents=[common, single_h], help="polynomial least-squares demo")
    p.add_argument("--function", default="franke", choices=sorted(polylsq.FUNCTIONS))
    p.add_argument("--degree", type=int, default=10)
    p.add_argument("--grid", type=int, default=51)
    p.add_argument("--eval-grid", type=int, default=501)
    p.add_argument("--pivotal", action="store_true")
    p.add_argument("--points-csv", help="write pivotal (x, y) locations here")

    p = sub.add_parser("bench", parents=[common], help="solve-count benchmark")
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--cols", type=int)
    p.add_argument("--ranks", type=_int_list, default=[30, 60])
    p.add_argument("--h", type=_h_list, default=[1, 2, 3, 4, "r"], help="e.g. 1,2,3,4,r")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--mode", choices=["tall", "square"], default="tall")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _config(args, mode="alternating") -> MaxvolConfig:
    return MaxvolConfig(epsilon=args.eps, h=getattr(args, "h", 1), max_sweeps=args.max_sweeps,
                        seed=args.seed, mode=mode)


def _cmd_cross(args) -> int:
    a = read_csv(args.input)
    rep = maxvol(a, args.rank, _config(args))
    log.info("maxvol: %d sweeps, %d solves, converged=%s", rep.sweeps, rep.solve_count, rep.converged)
    cert = bound_certificate(a, build_cross(a, rep.indices))
    doc = {
        "rank": args.rank,
        "indices": {"I": list(rep.indices.I), "J": list(rep.indices.J)},
        "chebyshevError": cert.error,
        "classicBound": cert.classic,
        "improvedBound": cert.improved,
        "nu": cert.nu,
    }
    _dump(doc, args.report)
    return 0


def _cmd_compress(args) -> int:
    img = imgcodec.load_pgm(Path(args.input).read_bytes())
    cfg = _config(args)
    probes = []
    if args.rank is not None:
        c, achieved = imgcodec.compress_rank(img, args.rank, cfg)
    else:
        c, achieved, search = imgcodec.compress_psnr(img, args.psnr, cfg)
        probes = [[r, _json_float(p)] for r, p in search.probes]
    data = imgcodec.xcur_encode(c)
    Path(args.output).write_bytes(data)
    _dump({
        "width": c.width,
        "height": c.height,
        "rank": c.rank,
        "storedEntries": c.stored_entry_count,
        "ratio": c.ratio,
        "psnr": _json_float(achieved),
        "bytes": len(data),
        "probes": probes,
    }, None)
    return 0


def _cmd_decompress(args) -> int:
    c = imgcodec.xcur_decode(Path(args.input).read_bytes())
    img = imgcodec.decompress(c)
    Path(args.output).write_bytes(imgcodec.save_pgm(img))
    value = None
    if args.ref:
        ref = imgcodec.load_pgm(Path(args.ref).read_bytes())
        value = _json_float(imgcodec.psnr(ref, img))
    _dump({"width": c.width, "height": c.height, "rank": c.rank, "psnr": value}, None)
    return 0


def _cmd_lsq(args) -> int:
    cmp = polylsq.fit_function(args.function, args.degree, args.grid, args.eval_grid,
                               pivotal=args.pivotal, cfg=_config(args, mode="rows"))
    rep = cmp.pivotal if args.pivotal else cmp.full
    log.info("full-grid relative error %.3e", cmp.full.rel_error)
    if args.points_csv and args.pivotal:
        pts = polylsq.SampleGrid(args.grid).points[rep.pivotal_rows]
        with open(args.points_csv, "w") as fh:
            fh.write("x,y\n")
            for x, y in pts:
                fh.write(f"{x!r},{y!r}\n")
    _dump({
        "function": args.function,
        "degree": args.degree,
        "method": rep.method,
        "basisSize": polylsq.Basis2D(args.degree).size,
        "relError": rep.rel_error,
        "pivotalRows": list(rep.pivotal_rows),
        "coefficients": [float(c) for c in rep.coefficients],
        "boundTerms": rep.bound_terms,
    }, None)
    return 0


def _cmd_bench(args) -> int:
    spec = bench.BenchSpec(rows=args.rows, cols=args.cols, ranks=tuple(args.ranks),
                           h_values=tuple(args.h), trials=args.trials, seed=args.seed,
                           mode=args.mode, epsilon=args.eps)
    data = bench.emit_report(bench.run_bench(spec))
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.write(data.decode("ascii"))
    return 0


COMMANDS = {
    "cross": _cmd_cross,
    "compress": _cmd_compress,
    "decompress": _cmd_decompress,
    "lsq-demo": _cmd_lsq,
    "bench": _cmd_bench,
}


def run(args: argparse.Namespace) -> int:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (CrossmaxError, ValueError, OSError) as exc:
        print(f"crossmax: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
