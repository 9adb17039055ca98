"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 property violation.
Primary output goes to stdout (TSV) or ``--out`` (CSV); logs go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import load_dataset, normalize_dataset
from .distances import DistanceSpec, DtwConstraint
from .errors import (
    ConflictingOptions,
    IndexConfigMismatch,
    MissingRequired,
    TsMatchError,
    UnknownFlag,
    UsageError,
)
from .index import IndexConfig, build_index, load_index, save_index
from .matcher import ALGORITHMS, bench_window_effect, default_algorithm, knn, range_query, rescore
from .motifs import find_motifs, symbolize
from .transforms import TRANSFORM_IDS, TransformSpec

log = logging.getLogger("tsmatch")

SUBCOMMANDS = ("build-index", "range-query", "knn-query", "tlb-bench", "window-bench", "motif-discover", "selfcheck")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(message)
        if "required" in message:
            raise MissingRequired(message)
        raise UsageError(message)


@dataclass
class RunConfig:
    """Validated options for one subcommand run."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


def _add_data(p, flag="--input", required=True):
    p.add_argument(flag, required=required, help="dataset file, one sequence per line")
    p.add_argument("--format", choices=("ucr_whitespace", "csv"), default="ucr_whitespace")
    p.add_argument("--labeled", action="store_true", help="first token of each line is a label")
    p.add_argument("--normalize", choices=("none", "zscore", "minmax"), default="none",
                   help="per-sequence normalization applied at load")


def _add_query(p):
    p.add_argument("--index", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("ucr_whitespace", "csv"), default="ucr_whitespace")
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--normalize", choices=("none", "zscore", "minmax"), default="none")
    p.add_argument("--query", required=True, help="file whose first sequence (or --query-id) is the query")
    p.add_argument("--query-id", type=int, default=0)
    p.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    p.add_argument("--J", type=int, default=None)
    p.add_argument("--no-tree", action="store_true", help="linear MBR scan instead of the tree")
    p.add_argument("--distance", choices=("l1", "l2", "dtw", "erp", "edr"), default="l2",
                   help="non-l2 distances rescore the Euclidean-exact answer set")
    p.add_argument("--dtw-constraint", default="none", help="none, itakura, or sakoe:R")
    p.add_argument("--erp-gap", type=float, default=0.0)
    p.add_argument("--edr-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="plain-text 'key = value' defaults; flags override")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="tsmatch", description="Filter-and-refine time-series subsequence matching.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("build-index", parents=[common], help="window, transform and index a dataset")
    _add_data(p)
    p.add_argument("--transform", choices=TRANSFORM_IDS, default="paa")
    p.add_argument("--frames", type=int, default=None, help="PAA frame count")
    p.add_argument("--coeffs", type=int, default=None, help="DFT/DCT/Haar coefficient count")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--slide", choices=("sliding", "disjoint", "j_sliding"), default="sliding")
    p.add_argument("--J", type=int, default=1)
    p.add_argument("--pack", type=int, default=16)
    p.add_argument("--fanout", type=int, default=16)

    p = sub.add_parser("range-query", parents=[common], help="exact epsilon-range subsequence search")
    _add_query(p)
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("knn-query", parents=[common], help="exact k-nearest subsequence search")
    _add_query(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("tlb-bench", parents=[common], help="lower-bound tightness report")
    _add_data(p)
    p.add_argument("--window", type=int, default=None, help="pair length (default: shortest sequence)")
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--coeffs", type=int, default=None)
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--items", default=None, help="comma list of name[:param], e.g. paa:8,lb_keogh:4")

    p = sub.add_parser("window-bench", parents=[common], help="window size effect report")
    _add_data(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--windows", default="8,16,32,64")
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--J", type=int, default=None)
    p.add_argument("--pack", type=int, default=16)

    p = sub.add_parser("motif-discover", parents=[common], help="cluster windows into symbols and mine motifs")
    _add_data(p)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--motif-len", type=int, default=3)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--no-overlap", action="store_true")
    p.add_argument("--centroids", default=None, help="file of predefined primitive shapes, one per line")

    p = sub.add_parser("selfcheck", parents=[common], help="run the property suites on generated data")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--break-bound", action="store_true", help="test hook: inflate bounds by 1%%")
    return parser


def read_config_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise UsageError(f"unknown subcommand {name}")


def _coerce(action, value: str):
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes", "on")
    v = action.type(value) if action.type else value
    if action.choices and v not in action.choices:
        raise UsageError(f"config value {value!r} not in {list(action.choices)}")
    return v


def parse_config(argv: Optional[list] = None) -> RunConfig:
    """Parse flags, merge an optional config file beneath them, and validate."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] not in SUBCOMMANDS:
        parser.parse_args(argv)  # raises the usage error
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    config_path = pre.parse_known_args(argv[1:])[0].config
    if config_path:
        sp = _subparser(parser, argv[0])
        actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
        file_vals = read_config_file(config_path)
        unknown = sorted(set(file_vals) - set(actions))
        if unknown:
            raise UnknownFlag(f"unknown config key(s): {', '.join(unknown)}")
        sp.set_defaults(**{k: _coerce(actions[k], v) for k, v in file_vals.items()})
        for a in sp._actions:
            if a.dest in file_vals:
                a.required = False
    ns = parser.parse_args(argv)
    opts = vars(ns)
    cfg = RunConfig(opts.pop("subcommand"), opts)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    o = cfg.options

    def need(cond, msg):
        if not cond:
            raise ConflictingOptions(msg)

    need(o["threads"] >= 1, "--threads must be >= 1")
    if "epsilon" in o:
        need(o["epsilon"] >= 0, "--epsilon must be >= 0")
    if "k" in o:
        need(o["k"] >= 1, "--k must be >= 1")
    if "trials" in o:
        need(o["trials"] >= 1, "--trials must be >= 1")
    if cfg.subcommand == "build-index":
        w = o["window"]
        need(w >= 1, "--window must be >= 1")
        need(o["pack"] >= 1, "--pack must be >= 1")
        need(o["fanout"] >= 2, "--fanout must be >= 2")
        if o["slide"] == "j_sliding":
            need(1 <= o["J"] <= w, f"--J must satisfy 1 <= J <= window ({w})")
        if o["transform"] == "paa":
            need(o["coeffs"] is None, "--coeffs does not apply to PAA; use --frames")
        elif o["transform"] != "identity":
            need(o["frames"] is None, f"--frames applies to PAA only; use --coeffs with {o['transform']}")
    if cfg.subcommand in ("range-query", "knn-query"):
        if o["distance"] != "l2":
            need(cfg.subcommand == "range-query", "kNN is exact under l2 only")
        try:
            DtwConstraint.parse(o["dtw_constraint"])
        except TsMatchError as exc:
            raise ConflictingOptions(str(exc)) from None
    if cfg.subcommand == "window-bench":
        try:
            ws = [int(t) for t in o["windows"].split(",") if t.strip()]
        except ValueError:
            raise ConflictingOptions("--windows must be a comma list of integers") from None
        need(ws and all(w >= 1 for w in ws), "--windows must be positive integers")
        algs = [a.strip() for a in o["algorithms"].split(",") if a.strip()]
        need(algs and all(a in ALGORITHMS for a in algs), f"--algorithms must be drawn from {ALGORITHMS}")
    if cfg.subcommand == "motif-discover":
        need(o["window"] >= 1 and o["clusters"] >= 1, "--window and --clusters must be >= 1")
        need(o["motif_len"] >= 1 and o["min_count"] >= 1, "--motif-len and --min-count must be >= 1")


def validate_against_index(cfg: RunConfig, idx) -> str:
    """Resolve the algorithm for ``idx`` or raise :class:`IndexConfigMismatch`."""
    c = idx.config
    alg = cfg.algorithm or default_algorithm(c)
    need_step = {"frm": 1, "dualmatch": c.window}.get(alg)
    if need_step is not None and c.step != need_step:
        raise IndexConfigMismatch(f"--algorithm {alg} cannot use an index built with {c.kind} windows (step {c.step})")
    if alg == "generalmatch" and cfg.J is not None and cfg.J != c.step:
        raise IndexConfigMismatch(f"--J {cfg.J} does not match the index sliding factor {c.step}")
    return alg


# -- subcommands -------------------------------------------------------------

def _load(path, cfg: RunConfig):
    ds = load_dataset(path, cfg.format, cfg.labeled)
    return normalize_dataset(ds, cfg.normalize)


def _emit(lines, cfg: RunConfig, header: Optional[str] = None) -> None:
    text = "\n".join(([header] if header else []) + list(lines)) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _transform_from(cfg: RunConfig) -> TransformSpec:
    if cfg.transform == "paa":
        return TransformSpec("paa", cfg.frames or 4)
    if cfg.transform == "identity":
        return TransformSpec("identity", 1)
    return TransformSpec(cfg.transform, cfg.coeffs or 4)


def cmd_build_index(cfg: RunConfig) -> int:
    if not cfg.out:
        raise MissingRequired("build-index needs --out")
    ds = _load(cfg.input, cfg)
    icfg = IndexConfig(cfg.window, cfg.slide, cfg.J if cfg.slide == "j_sliding" else 1,
                       _transform_from(cfg), cfg.pack, cfg.fanout)
    idx = build_index(ds, icfg)
    save_index(idx, cfg.out)
    log.info("indexed %d windows into %d MBRs -> %s", idx.n_entries, idx.n_mbrs, cfg.out)
    return 0


def _query_setup(cfg: RunConfig):
    idx = load_index(cfg.index, use_tree=not cfg.no_tree)
    alg = validate_against_index(cfg, idx)
    ds = _load(cfg.data, cfg)
    qs = load_dataset(cfg.query, cfg.format, cfg.labeled)
    if not 0 <= cfg.query_id < len(qs):
        raise ConflictingOptions(f"--query-id {cfg.query_id} out of range (file has {len(qs)} sequences)")
    qs = normalize_dataset(qs, cfg.normalize)
    return idx, alg, ds, qs[cfg.query_id]


def _distance_from(cfg: RunConfig) -> DistanceSpec:
    return DistanceSpec(cfg.distance, constraint=DtwConstraint.parse(cfg.dtw_constraint),
                        gap=cfg.erp_gap, tol=cfg.edr_tol)


def cmd_range_query(cfg: RunConfig) -> int:
    idx, alg, ds, Q = _query_setup(cfg)
    stats: dict = {}
    res = range_query(idx, ds, Q, cfg.epsilon, alg, J=cfg.J, stats=stats, threads=cfg.threads)
    log.info("%s: %d candidates, %d matches", alg, stats["candidates"], len(res))
    if cfg.distance != "l2":
        log.warning("rescoring the Euclidean answer set with %s; not an exact %s search", cfg.distance, cfg.distance)
        res = rescore(res, ds, Q, _distance_from(cfg))
    _emit((r.as_row() for r in res), cfg)
    return 0


def cmd_knn_query(cfg: RunConfig) -> int:
    idx, alg, ds, Q = _query_setup(cfg)
    stats: dict = {}
    res = knn(idx, ds, Q, cfg.k, alg, stats=stats)
    log.info("%s kNN: refined %d of %d placements", alg, stats["candidates"], stats["placements"])
    _emit((r.as_row() for r in res), cfg)
    return 0


def cmd_tlb_bench(cfg: RunConfig) -> int:
    from .bench import TlbRow, default_tlb_items, tlb_bench

    ds = _load(cfg.input, cfg)
    n = cfg.window or min(ds.lengths)
    if cfg.items:
        items = []
        for tok in cfg.items.split(","):
            name, _, param = tok.strip().partition(":")
            items.append((name, int(param) if param else (n if name == "identity" else 0)))
    else:
        items = default_tlb_items(n, cfg.frames, cfg.coeffs, cfg.band)
    rows = tlb_bench(ds, n, cfg.pairs, cfg.seed, items, frames=cfg.frames)
    _emit((r.as_csv() for r in rows), cfg, ",".join(TlbRow.FIELDS))
    return 0


def cmd_window_bench(cfg: RunConfig) -> int:
    from .matcher import WindowBenchRow

    ds = _load(cfg.input, cfg)
    qs = _load(cfg.queries, cfg)
    ws = [int(t) for t in cfg.windows.split(",") if t.strip()]
    algs = [a.strip() for a in cfg.algorithms.split(",") if a.strip()]
    rows = bench_window_effect(ds, qs, cfg.epsilon, ws, algs, pack_count=cfg.pack, J=cfg.J)
    _emit((r.as_csv() for r in rows), cfg, ",".join(WindowBenchRow.FIELDS))
    return 0


def cmd_motif_discover(cfg: RunConfig) -> int:
    ds = _load(cfg.input, cfg)
    centroids = None
    if cfg.centroids:
        centroids = np.stack([s.values for s in load_dataset(cfg.centroids)])
    strings = symbolize(ds, cfg.window, cfg.clusters, cfg.seed, normalized=not cfg.no_normalize, centroids=centroids)
    motifs = find_motifs(strings, cfg.motif_len, cfg.min_count, overlap=not cfg.no_overlap)
    lines = (
        "{}\t{}\t{}".format(
            ",".join(map(str, m.pattern)), m.count, " ".join(f"{s}:{o}" for s, o in m.occurrences)
        )
        for m in motifs
    )
    _emit(lines, cfg)
    return 0


def cmd_selfcheck(cfg: RunConfig) -> int:
    from .bench import run_selfcheck_suites

    report = run_selfcheck_suites(cfg.seed, cfg.trials, cfg.break_bound, report=lambda s: print(s, flush=True))
    return 0 if all(ok for _, ok, _ in report) else 3


COMMANDS = {
    "build-index": cmd_build_index,
    "range-query": cmd_range_query,
    "knn-query": cmd_knn_query,
    "tlb-bench": cmd_tlb_bench,
    "window-bench": cmd_window_bench,
    "motif-discover": cmd_motif_discover,
    "selfcheck": cmd_selfcheck,
}


def main(argv: Optional[list] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = parse_config(argv)
        if cfg.verbose:
            logging.getLogger().setLevel(logging.INFO)
        return COMMANDS[cfg.subcommand](cfg)
    except TsMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
