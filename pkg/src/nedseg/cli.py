"""Command-line entry point.

Subcommands::

    nedseg compare A.pgm B.pgm [--index ned|weak|ned-norm]
    nedseg segment in.pgm --out out.pgm [--hr 15 --hs 12 --criterion ned|we
                   --eps E --max-iter 500 --trace t.csv]
    nedseg eval seg.pgm gt1.lm [gt2.lm ...] --metric ri|pri|npri
    nedseg histdemo in.pgm --shift S --out-prefix P
    nedseg corpus DIR [--config cfg.json] [--summary summary.csv] [--jobs N]

Exit status: 0 on success, 2 for invalid arguments or inputs, 3 when a
segmentation stopped at the iteration cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import algebra, evaluation, io
from .errors import DegenerateNormalizationError, NedsegError
from .mshi import (
    DEFAULT_EPSILON,
    DEFAULT_HR,
    DEFAULT_HS,
    DEFAULT_MAX_ITERATIONS,
    Bandwidths,
    StoppingRule,
    mshi_segment,
)
from .similarity import ned, ned_normalized, weak_distance

log = logging.getLogger("nedseg")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3

CRITERIA = {"ned": "ned", "we": "weak-entropy", "weak-entropy": "weak-entropy"}
SUMMARY_FIELDS = ["image", "criterion", "iterations", "ri", "pri", "npri"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input: str | None = None
    output: str | None = None
    h_r: float = DEFAULT_HR
    h_s: int = DEFAULT_HS
    criterion: str = "ned"
    epsilon: float | None = None
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    trace: str | None = None
    connectivity: int = 4

    def rule(self) -> StoppingRule:
        kind = CRITERIA[self.criterion]
        eps = DEFAULT_EPSILON[kind] if self.epsilon is None else self.epsilon
        return StoppingRule(kind, eps, self.max_iterations)

    def bandwidths(self) -> Bandwidths:
        return Bandwidths(self.h_r, self.h_s)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nedseg", description="Entropy-based image similarity and MSHi segmentation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compare", help="similarity index between two images")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--index", choices=["ned", "weak", "ned-norm"], default="ned")

    p = sub.add_parser("segment", help="mean shift iterative segmentation")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_run_options(p)
    p.add_argument("--trace", help="write the per-iteration trace CSV here")

    p = sub.add_parser("eval", help="score a segmented image against ground truths")
    p.add_argument("segmented")
    p.add_argument("ground_truth", nargs="+")
    p.add_argument("--metric", choices=["ri", "pri", "npri"], default="pri")
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=4)

    p = sub.add_parser("histdemo", help="histograms of three kinds of difference with a scalar image")
    p.add_argument("input")
    p.add_argument("--shift", type=int, required=True)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("corpus", help="segment and score every image in a directory")
    p.add_argument("directory")
    p.add_argument("--config", help="JSON file overriding run parameters")
    p.add_argument("--summary", help="summary CSV path (default: <output_dir>/summary.csv)")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hr", type=float, default=DEFAULT_HR)
    p.add_argument("--hs", type=int, default=DEFAULT_HS)
    p.add_argument("--criterion", choices=["ned", "we"], default="ned")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_compare(args) -> int:
    a = io.read_pgm(args.a)
    b = io.read_pgm(args.b)
    fn = {"ned": ned, "weak": weak_distance, "ned-norm": ned_normalized}[args.index]
    print(_fmt(fn(a, b).value))
    return EXIT_OK


def cmd_segment(args) -> int:
    cfg = RunConfig(
        input=args.input, output=args.out, h_r=args.hr, h_s=args.hs,
        criterion=args.criterion, epsilon=args.eps, max_iterations=args.max_iter,
        trace=args.trace,
    )
    rule, h = cfg.rule(), cfg.bandwidths()
    image = io.read_pgm(cfg.input)
    result, trace = mshi_segment(image, h, rule)
    io.write_pgm(result, cfg.output)
    if cfg.trace:
        io.write_trace_csv(trace, cfg.trace)
    last = trace.entries[-1]
    print(f"iterations={len(trace)} criterion={_fmt(last.criterion)} terminated_by={trace.terminated_by}")
    return EXIT_CAP if trace.terminated_by == "cap" else EXIT_OK


def cmd_eval(args) -> int:
    seg = evaluation.label_regions(io.read_pgm(args.segmented), args.connectivity)
    gts = [io.read_labelmap(p) for p in args.ground_truth]
    if args.metric == "ri":
        value = evaluation.rand_index(seg, gts[0])
    elif args.metric == "pri":
        value = evaluation.pri(seg, gts)
    else:
        value = evaluation.npri(seg, gts)
    print(_fmt(value))
    return EXIT_OK


def cmd_histdemo(args) -> int:
    image = io.read_pgm(args.input)
    s = algebra.scalar_image(image.width, image.height, image.levels, args.shift)
    outputs = {
        "original": image,
        "truncated": algebra.sub_truncate(image, s),
        "absolute": algebra.sub_abs(image, s),
        "group": algebra.sub_mod(image, s),
    }
    for name, img in outputs.items():
        path = f"{args.out_prefix}_{name}.csv"
        io.write_histogram_csv(algebra.histogram(img), path)
        print(path)
    return EXIT_OK


def _load_corpus_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise NedsegError("corpus config must be a JSON object")
    return cfg


def _ground_truths_for(image_path: Path) -> list[Path]:
    """``<stem>.lm`` and ``<stem>.<tag>.lm`` next to the image, sorted by name."""
    exact = image_path.with_suffix(".lm")
    tagged = sorted(image_path.parent.glob(f"{image_path.stem}.*.lm"))
    return ([exact] if exact.is_file() else []) + tagged


def _corpus_run_config(cfg: dict, criterion: str) -> RunConfig:
    return RunConfig(
        h_r=cfg.get("h_r", DEFAULT_HR),
        h_s=cfg.get("h_s", DEFAULT_HS),
        criterion=criterion,
        epsilon=cfg.get("epsilon", {}).get(criterion),
        max_iterations=cfg.get("max_iterations", DEFAULT_MAX_ITERATIONS),
        connectivity=cfg.get("connectivity", 4),
    )


def _corpus_run(image_path: str, criterion: str, cfg: dict, out_dir: str) -> dict:
    run = _corpus_run_config(cfg, criterion)
    path = Path(image_path)
    log.info("segmenting %s with %s", path.name, criterion)
    image = io.read_pgm(path)
    result, trace = mshi_segment(image, run.bandwidths(), run.rule())
    stem = f"{path.stem}_{criterion}"
    io.write_pgm(result, Path(out_dir) / f"{stem}.pgm")
    io.write_trace_csv(trace, Path(out_dir) / f"{stem}_trace.csv")

    row = {"image": path.stem, "criterion": criterion, "iterations": len(trace),
           "ri": "", "pri": "", "npri": "", "cap": trace.terminated_by == "cap"}
    gts = [io.read_labelmap(p) for p in _ground_truths_for(path)]
    if gts:
        seg = evaluation.label_regions(result, run.connectivity)
        row["ri"] = _fmt(evaluation.rand_index(seg, gts[0]))
        row["pri"] = _fmt(evaluation.pri(seg, gts))
        try:
            row["npri"] = _fmt(evaluation.npri(seg, gts))
        except DegenerateNormalizationError:
            row["npri"] = "NA"
    return row


def cmd_corpus(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise NedsegError(f"{directory} is not a directory")
    cfg = _load_corpus_config(args.config)
    unknown = set(cfg) - {"h_r", "h_s", "criteria", "epsilon", "max_iterations",
                          "connectivity", "output_dir"}
    if unknown:
        raise NedsegError(f"unknown config keys: {sorted(unknown)}")
    criteria = cfg.get("criteria", ["ned", "we"])
    if not isinstance(criteria, list) or any(c not in CRITERIA for c in criteria):
        raise NedsegError(f"criteria must be a list drawn from {sorted(CRITERIA)}")
    if not isinstance(cfg.get("epsilon", {}), dict):
        raise NedsegError("epsilon must map criterion names to thresholds")
    # validate parameters once, before any work is scheduled
    for c in criteria:
        run = _corpus_run_config(cfg, c)
        run.rule()
        run.bandwidths()
        if run.connectivity not in (4, 8):
            raise NedsegError("connectivity must be 4 or 8")

    images = sorted(directory.glob("*.pgm"))
    if not images:
        raise NedsegError(f"no .pgm images in {directory}")
    out_dir = Path(cfg.get("output_dir", directory / "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(str(p), c, cfg, str(out_dir)) for p in images for c in criteria]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_corpus_run, *zip(*jobs)))
    else:
        rows = [_corpus_run(*j) for j in jobs]

    summary = args.summary or out_dir / "summary.csv"
    io.write_rows_csv(
        ({k: r[k] for k in SUMMARY_FIELDS} for r in rows), SUMMARY_FIELDS, summary)
    print(",".join(SUMMARY_FIELDS))
    for r in rows:
        print(",".join(str(r[k]) for k in SUMMARY_FIELDS))
    return EXIT_CAP if any(r["cap"] for r in rows) else EXIT_OK


COMMANDS = {
    "compare": cmd_compare,
    "segment": cmd_segment,
    "eval": cmd_eval,
    "histdemo": cmd_histdemo,
    "corpus": cmd_corpus,
}


def cli_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"nedseg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"nedseg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
