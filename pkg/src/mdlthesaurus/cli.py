"""Command-line pipeline: cluster, synth, patterns, disambiguate.

Every command is deterministic for fixed flags (randomness comes only from
``--seed``, default 0), writes data to files only, sends messages to stderr,
and records a JSON manifest with its resolved configuration and the SHA-256
checksums of inputs and outputs.

Exit codes: 0 success, 1 usage or input/config errors, 2 runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .cluster import AnnealConfig, build_tree, dump_tree, load_tree
from .corpus import load_cooc, load_tuples
from .model import Criterion
from .patterns import (
    DefaultStage,
    LexicalAssocStage,
    Stage,
    ThesaurusStage,
    decide_all,
    dump_patterns,
    evaluate,
    group_samples,
    learn_cut,
    load_patterns,
    load_slot_samples,
)
from .synthetic import (
    DEFAULT_KL_EPS,
    DEFAULT_SIZES,
    DEFAULT_TRIALS,
    aggregate_records,
    default_true_model,
    load_true_model,
    run_convergence_experiment,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _InputError(Exception):
    """Bad input or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(manifest_path, command: str, config: dict, inputs, outputs,
                    started: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "duration_s": time.monotonic() - started,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(args, primary_output) -> str:
    return args.manifest if args.manifest else f"{primary_output}.manifest.json"


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _fmt(value: float) -> str:
    return format(value, ".6g")


def _anneal_config(args, criterion: Criterion) -> AnnealConfig:
    return AnnealConfig(seed=args.seed, t_init=args.t_init, cool=args.cool,
                        window_mult=args.window_mult, criterion=criterion)


def _add_schedule_flags(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root random seed (default 0)")
    parser.add_argument("--t-init", type=float, default=1.0,
                        help="initial annealing temperature (default 1.0)")
    parser.add_argument("--cool", type=float, default=0.9,
                        help="temperature multiplier per improving window (default 0.9)")
    parser.add_argument("--window-mult", type=int, default=10,
                        help="trials per window as a multiple of the noun count (default 10)")


# ---------------------------------------------------------------------------
# cluster

def cmd_cluster(args) -> int:
    started = time.monotonic()
    try:
        data = load_cooc(args.input)
        config = _anneal_config(args, Criterion(args.criterion))
    except (OSError, ValueError) as exc:
        _info(f"cluster: {exc}")
        return EXIT_USAGE
    try:
        tree = build_tree(data, config)
        dump_tree(tree, args.output)
        _write_manifest(
            _manifest_path(args, args.output), "cluster",
            {"input": str(args.input), "output": str(args.output),
             "criterion": args.criterion, "seed": args.seed, "t_init": args.t_init,
             "cool": args.cool, "window_mult": args.window_mult},
            [args.input], [args.output], started)
    except Exception as exc:
        _info(f"cluster: {exc}")
        return EXIT_RUNTIME
    _info(f"cluster: wrote tree with {tree.leaf_count} leaves to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth

def _derived_path(base, tag: str) -> Path:
    """Sibling path with a tag spliced before the suffix: out.csv -> out_<tag>.csv."""
    base = Path(base)
    return base.with_name(base.stem + "_" + tag + (base.suffix or ".csv"))


def cmd_synth(args) -> int:
    started = time.monotonic()
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])) or min(sizes) < 1:
            raise _InputError(f"--sizes must be strictly ascending positive integers, got {args.sizes!r}")
        if args.trials < 1:
            raise _InputError("--trials must be at least 1")
        if args.model:
            model = load_true_model(args.model, seed=args.seed)
        else:
            model = default_true_model(seed=args.seed)
        configs = (_anneal_config(args, Criterion.MDL), _anneal_config(args, Criterion.MLE))
    except (_InputError, OSError, ValueError) as exc:
        _info(f"synth: {exc}")
        return EXIT_USAGE
    try:
        records = run_convergence_experiment(model, sizes, args.trials, configs,
                                             kl_eps=args.kl_eps)
        agg_csv = args.out_agg or _derived_path(args.out_csv, "agg")
        with open(args.out_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_size", "trial", "criterion", "num_clusters", "kl"])
            for r in records:
                writer.writerow([r.sample_size, r.trial, r.criterion.value,
                                 r.num_clusters, _fmt(r.kl)])
        with open(agg_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_size", "criterion", "mean_num_clusters", "mean_kl"])
            for a in aggregate_records(records):
                writer.writerow([a.sample_size, a.criterion.value,
                                 _fmt(a.mean_clusters), _fmt(a.mean_kl)])
        inputs = [args.model] if args.model else []
        _write_manifest(
            _manifest_path(args, args.out_csv), "synth",
            {"model": str(args.model) if args.model else "<builtin default>",
             "sizes": sizes, "trials": args.trials, "seed": args.seed,
             "t_init": args.t_init, "cool": args.cool, "window_mult": args.window_mult,
             "kl_eps": args.kl_eps, "out_csv": str(args.out_csv), "out_agg": str(agg_csv)},
            inputs, [args.out_csv, agg_csv], started)
    except Exception as exc:
        _info(f"synth: {exc}")
        return EXIT_RUNTIME
    _info(f"synth: wrote {len(records)} records to {args.out_csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# patterns

def _find_sample_line(path, filler: str) -> int:
    """Line number of the first sample whose filler column matches."""
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            fields = raw.rstrip("\r\n").split("\t")
            if len(fields) >= 3 and fields[2].strip() == filler:
                return line_no
    return 0


def cmd_patterns(args) -> int:
    started = time.monotonic()
    try:
        tree = load_tree(args.tree)
        samples = load_slot_samples(args.samples)
        if not samples:
            raise _InputError(f"{args.samples}: no slot samples")
    except (_InputError, OSError, ValueError) as exc:
        _info(f"patterns: {exc}")
        return EXIT_USAGE
    try:
        for sample in samples:
            if sample.filler not in tree:
                line = _find_sample_line(args.samples, sample.filler)
                raise ValueError(
                    f"filler not in thesaurus: {sample.filler} ({args.samples}:{line})")
        learned = {key: learn_cut(tree, group)
                   for key, group in group_samples(samples).items()}
        dump_patterns(learned, args.output)
        _write_manifest(
            _manifest_path(args, args.output), "patterns",
            {"tree": str(args.tree), "samples": str(args.samples),
             "output": str(args.output)},
            [args.tree, args.samples], [args.output], started)
    except Exception as exc:
        _info(f"patterns: {exc}")
        return EXIT_RUNTIME
    _info(f"patterns: wrote {len(learned)} patterns to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# disambiguate

_STAGE_RESOURCES = {
    Stage.AUTO_THESAURUS: ("--tree and --patterns", ("tree", "patterns")),
    Stage.EXTERNAL_THESAURUS: ("--ext-tree and --ext-patterns", ("ext_tree", "ext_patterns")),
    Stage.LEXICAL_ASSOC: ("--assoc", ("assoc",)),
    Stage.DEFAULT: ("", ()),
}


def _build_chain(args):
    chain = []
    for token in args.chain.split(","):
        name = token.strip()
        try:
            stage = Stage(name)
        except ValueError:
            raise _InputError(f"unknown stage name: {name!r}") from None
        if stage is Stage.NONE:
            raise _InputError("stage 'none' cannot appear in a chain")
        flags, attrs = _STAGE_RESOURCES[stage]
        if any(getattr(args, attr) is None for attr in attrs):
            raise _InputError(f"stage '{name}' requires {flags}")
        if stage is Stage.AUTO_THESAURUS:
            tree = load_tree(args.tree)
            chain.append(ThesaurusStage(tree, load_patterns(args.patterns, tree),
                                        Stage.AUTO_THESAURUS))
        elif stage is Stage.EXTERNAL_THESAURUS:
            tree = load_tree(args.ext_tree)
            chain.append(ThesaurusStage(tree, load_patterns(args.ext_patterns, tree),
                                        Stage.EXTERNAL_THESAURUS))
        elif stage is Stage.LEXICAL_ASSOC:
            chain.append(LexicalAssocStage(load_cooc(args.assoc)))
        else:
            chain.append(DefaultStage())
    if not chain:
        raise _InputError("--chain must name at least one stage")
    return chain


def cmd_disambiguate(args) -> int:
    started = time.monotonic()
    try:
        tuples = load_tuples(args.tuples)
        if not tuples:
            raise _InputError(f"{args.tuples}: no tuples")
        chain = _build_chain(args)
    except (_InputError, OSError, ValueError) as exc:
        _info(f"disambiguate: {exc}")
        return EXIT_USAGE
    try:
        decisions = decide_all(tuples, chain)
        report = evaluate(tuples, chain)
        stages_csv = args.out_stages or _derived_path(args.out_report, "stages")
        with open(args.out_decisions, "w", encoding="utf-8") as fh:
            for tup, decision in zip(tuples, decisions):
                fh.write(f"{tup.verb}\t{tup.noun1}\t{tup.prep}\t{tup.noun2}"
                         f"\t{decision.verdict.value}\t{decision.stage.value}\n")
        accuracy = report.accuracy
        with open(args.out_report, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["chain", "coverage", "accuracy"])
            writer.writerow([args.chain, _fmt(report.coverage),
                             "" if accuracy is None else _fmt(accuracy)])
        with open(stages_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage", "decided", "correct", "accuracy"])
            for stage, stats in report.per_stage.items():
                writer.writerow([stage.value, stats.decided, stats.correct,
                                 "" if stats.accuracy is None else _fmt(stats.accuracy)])
        resource_inputs = [p for p in (args.tuples, args.tree, args.patterns, args.ext_tree,
                                       args.ext_patterns, args.assoc) if p]
        _write_manifest(
            _manifest_path(args, args.out_report), "disambiguate",
            {"tuples": str(args.tuples), "chain": args.chain,
             "tree": args.tree and str(args.tree),
             "patterns": args.patterns and str(args.patterns),
             "ext_tree": args.ext_tree and str(args.ext_tree),
             "ext_patterns": args.ext_patterns and str(args.ext_patterns),
             "assoc": args.assoc and str(args.assoc),
             "out_decisions": str(args.out_decisions), "out_report": str(args.out_report),
             "out_stages": str(stages_csv)},
            resource_inputs, [args.out_decisions, args.out_report, stages_csv], started)
    except Exception as exc:
        _info(f"disambiguate: {exc}")
        return EXIT_RUNTIME
    acc = "n/a" if report.accuracy is None else f"{report.accuracy:.1f}"
    _info(f"disambiguate: coverage {report.coverage:.1f}%, accuracy {acc}%")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdlthesaurus",
                     description="MDL word clustering, tree-cut patterns, and "
                                 "PP-attachment disambiguation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="build a thesaurus tree from co-occurrence data")
    p.add_argument("--input", required=True, help="co-occurrence TSV (verb, noun, count)")
    p.add_argument("--output", required=True, help="output tree file")
    p.add_argument("--criterion", choices=[c.value for c in Criterion], default="mdl")
    _add_schedule_flags(p)
    p.add_argument("--manifest", help="manifest path (default <output>.manifest.json)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synth", help="clustering-convergence experiment on a known model")
    p.add_argument("--model", help="true-model TSV (default: built-in 4-cluster model)")
    p.add_argument("--sizes", default=",".join(str(s) for s in DEFAULT_SIZES),
                   help="comma-separated ascending sample sizes")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--kl-eps", type=float, default=DEFAULT_KL_EPS,
                   help="lower clamp on estimated cell probabilities in the KL")
    p.add_argument("--out-csv", required=True, help="per-run records CSV")
    p.add_argument("--out-agg", help="aggregate means CSV (default <out-csv stem>_agg.csv)")
    _add_schedule_flags(p)
    p.add_argument("--manifest", help="manifest path (default <out-csv>.manifest.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("patterns", help="learn tree-cut patterns from slot samples")
    p.add_argument("--tree", required=True, help="thesaurus tree file")
    p.add_argument("--samples", required=True, help="slot-sample TSV (head, prep, filler, count)")
    p.add_argument("--output", required=True, help="pattern dump file")
    p.add_argument("--manifest", help="manifest path (default <output>.manifest.json)")
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("disambiguate", help="run a backoff chain over attachment tuples")
    p.add_argument("--tuples", required=True, help="attachment tuple TSV")
    p.add_argument("--chain", required=True,
                   help="comma-separated stages from {auto, external, la, default}")
    p.add_argument("--tree", help="thesaurus tree for the auto stage")
    p.add_argument("--patterns", help="pattern dump for the auto stage")
    p.add_argument("--ext-tree", help="thesaurus tree for the external stage")
    p.add_argument("--ext-patterns", help="pattern dump for the external stage")
    p.add_argument("--assoc", help="(prep, word, count) TSV for the la stage")
    p.add_argument("--out-decisions", required=True, help="per-tuple decisions TSV")
    p.add_argument("--out-report", required=True, help="coverage/accuracy CSV")
    p.add_argument("--out-stages", help="per-stage CSV (default <out-report stem>_stages.csv)")
    p.add_argument("--manifest", help="manifest path (default <out-report>.manifest.json)")
    p.set_defaults(func=cmd_disambiguate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
