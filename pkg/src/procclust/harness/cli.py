"""Command line entry point: ``procclust {sweep,cluster,theory,validate-bounds}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import ConfigError, DataError, load_config
from .io import write_csv
from .sweep import VALIDATE_HEADER, cluster_files, lemma2_suite, prop1_suite, run_sweep, theory_report

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

log = logging.getLogger("procclust")


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    rows, header = run_sweep(cfg, threads=args.threads)
    _emit(write_csv(rows, header, [f"config_hash={cfg.digest()} algorithm={cfg.algorithm}"], args.out), args.out)
    return EXIT_OK


def cmd_cluster(args) -> int:
    cfg = _config(args)
    rows, diag = cluster_files(args.files, cfg, labels_path=args.labels, fmt=args.format)
    comments = [f"config_hash={cfg.digest()} algorithm={cfg.algorithm}"]
    _emit(write_csv(rows, ["path", "cluster"], comments, args.out), args.out)
    dheader = ["N", "L", "eigenvalues"] + (["CE", "S"] if "CE" in diag else [])
    dout = None if args.out is None else f"{args.out}.diagnostics.csv"
    _emit(write_csv([diag], dheader, comments, dout), dout)
    return EXIT_OK


def cmd_theory(args) -> int:
    cfg = _config(args)
    rows, header = theory_report(cfg)
    _emit(write_csv(rows, header, [f"config_hash={cfg.digest()}"], args.out), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    seed = 0 if args.seed is None else args.seed
    rows = lemma2_suite(trials=args.trials, seed=seed) + prop1_suite(trials=args.trials, seed=seed)
    _emit(write_csv(rows, VALIDATE_HEADER, [f"seed={seed} trials={args.trials}"], args.out), args.out)
    failed = sum(not r["passed"] for r in rows)
    log.info("%d/%d bound checks passed", len(rows) - failed, len(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override master_seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="write CSV here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="procclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="clustering error over a parameter grid")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cluster", parents=[common], help="cluster series stored in text files")
    p.add_argument("config")
    p.add_argument("files", nargs="+")
    p.add_argument("--labels", default=None, help="ground-truth labels, one per line in file order")
    p.add_argument("--format", default="one-column-text", choices=["one-column-text", "csv-column"])
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("theory", parents=[common], help="clustering-condition report")
    p.add_argument("config")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("validate-bounds", parents=[common], help="Monte-Carlo checks of the analytic bounds")
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
