"""Command-line entry point: elgeo <normalize|reason|closure|train|grid|evaluate|naive|gen-toy>.

Exit codes: 0 success, 1 runtime failure, 2 input/usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .axioms import Form, ParseError, serialize_normalized
from .closure import (
    ClosureBudgetError, compute_closure, dump_closure, load_closure_dump,
)
from .config import (
    ConfigError, apply_overrides, extras, load_config_file, load_preset,
    resolved, to_train_config,
)
from .dataset import DatasetError, load_dataset, save_dataset
from .evaluation import EvaluationError, emit_roc, evaluate, naive_fit
from .geometry import load_model
from .manifest import RunManifest, config_digest
from .normalize import normalize
from .reasoner import dump_subsumptions, saturate
from .sampling import SamplingError
from .sexpr import SexprError, parse_general
from .toygen import PRESETS as TOY_PRESETS
from .training import TrainingError, grid_search, train

INPUT_ERRORS = (ParseError, SexprError, DatasetError, ConfigError,
                EvaluationError, FileNotFoundError, ValueError, KeyError)
RUNTIME_ERRORS = (TrainingError, ClosureBudgetError, SamplingError)


def _gather_config(args) -> dict:
    values: dict = {}
    if getattr(args, "preset", None):
        values.update(load_preset(args.preset))
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    if getattr(args, "set", None):
        values = apply_overrides(values, args.set)
    return values


def cmd_normalize(args) -> int:
    with open(args.input, encoding="utf-8") as f:
        general = parse_general(f.read())
    axioms, sig = normalize(general)
    with open(args.output, "w", encoding="utf-8") as f:
        f.write(serialize_normalized(axioms, sig))
    counts: dict[str, int] = {}
    for ax in axioms:
        counts[ax.form.value] = counts.get(ax.form.value, 0) + 1
    for form in Form:
        if form.value in counts:
            print(f"{form.value}\t{counts[form.value]}")
    print(f"total\t{len(axioms)}")
    return 0


def cmd_reason(args) -> int:
    kb = load_dataset(args.dataset)
    closure = saturate(kb)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(dump_subsumptions(closure))
    print(f"classes\t{kb.sig.n_classes}")
    print(f"unsatisfiable\t{len(closure.unsat)}")
    return 0


def cmd_closure(args) -> int:
    values = _gather_config(args)
    extra = extras(values)
    max_derived = args.max_derived if args.max_derived is not None \
        else int(extra["closure.max_derived"])
    strict = args.strict_printed_rules or bool(extra["closure.strict_printed_rules"])
    kb = load_dataset(args.dataset)
    sub = saturate(kb)
    dc = compute_closure(kb, sub, max_derived=max_derived, strict_printed_rules=strict)
    os.makedirs(args.out, exist_ok=True)
    dump_closure(dc, args.out)
    stats_path = os.path.join(args.out, "closure_stats.json")
    with open(stats_path, "w", encoding="utf-8") as f:
        json.dump({"derived": dc.stats, "strict_printed_rules": strict},
                  f, sort_keys=True, indent=2)
        f.write("\n")
    for form, count in sorted(dc.stats.items()):
        print(f"derived {form}\t{count}")
    return 0


def _load_closure_if_needed(kb, cfg):
    if cfg.filter_negatives or cfg.entailed_ratio > 0.0:
        return compute_closure(kb, saturate(kb))
    return None


def cmd_train(args) -> int:
    values = _gather_config(args)
    cfg = to_train_config(values)
    kb = load_dataset(args.dataset)
    dc = _load_closure_if_needed(kb, cfg)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(command="train", config=resolved(values), seed=cfg.seed).start()
    manifest.add_input(args.dataset)
    ckpt = os.path.join(args.out, "checkpoint.bin")
    model, report = train(kb, cfg, dc, checkpoint_path=ckpt)
    report_path = os.path.join(args.out, "report.jsonl")
    report.to_jsonl(report_path)
    summary_path = os.path.join(args.out, "summary.json")
    summary = report.summary()
    summary["config_digest"] = config_digest(manifest.config)
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, sort_keys=True, indent=2)
        f.write("\n")
    manifest.outputs = [ckpt, report_path, summary_path]
    manifest.finish().write(os.path.join(args.out, "manifest.json"))
    print(f"stopped at epoch {report.stop_epoch} (best {report.best_epoch}); "
          f"checkpoint {ckpt}")
    return 0


def cmd_grid(args) -> int:
    values = _gather_config(args)
    cfg = to_train_config(values)
    kb = load_dataset(args.dataset)
    dc = _load_closure_if_needed(kb, cfg)
    grids = None
    if args.grid:
        grids = {}
        for item in args.grid:
            if "=" not in item:
                raise ConfigError(f"--grid entries look like name=v1,v2: {item!r}")
            key, _, rhs = item.partition("=")
            grids[key.strip()] = tuple(json.loads(f"[{rhs}]"))
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(command="grid", config=resolved(values), seed=cfg.seed).start()
    manifest.add_input(args.dataset)
    result = grid_search(kb, cfg, grids, dc)
    table_path = os.path.join(args.out, "grid_results.tsv")
    with open(table_path, "w", encoding="utf-8") as f:
        f.write(result.to_table())
    manifest.outputs = [table_path]
    manifest.finish().write(os.path.join(args.out, "manifest.json"))
    print(result.to_table(), end="")
    return 0


def cmd_evaluate(args) -> int:
    values = _gather_config(args)
    extra = extras(values)
    model = load_model(args.checkpoint)
    kb = load_dataset(args.dataset)
    if (model.sig.class_names != kb.sig.class_names
            or model.sig.relation_names != kb.sig.relation_names):
        raise EvaluationError(
            "checkpoint identifier tables do not match the dataset; "
            "evaluate against the dataset the model was trained on")
    dc = None
    if args.closure_positives or args.closure_dir:
        if not args.closure_dir:
            raise EvaluationError(
                "closure-aware evaluation needs --closure-dir; run 'elgeo closure' first")
        dc = load_closure_dump(args.closure_dir, kb.sig)
    pool = args.pool or extra["eval.pool"]
    head_pool = args.head_pool or extra["eval.head_pool"]
    tie_mode = args.tie_mode or extra["eval.tie_mode"]
    manifest = RunManifest(command="evaluate", config=resolved(values),
                           seed=model.seed).start()
    manifest.add_input(args.checkpoint)
    manifest.add_input(args.dataset)
    report = evaluate(model, kb, dc, pool=pool, head_pool=head_pool,
                      tie_mode=tie_mode, closure_positives=args.closure_positives)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report_path = os.path.join(args.out, "eval_report.json")
        doc = json.loads(report.to_json())
        doc["config_digest"] = config_digest(manifest.config)
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(doc, f, sort_keys=True, indent=2)
            f.write("\n")
        roc_path = os.path.join(args.out, "roc.csv")
        emit_roc(report, roc_path)
        manifest.outputs = [report_path, roc_path]
        manifest.finish().write(os.path.join(args.out, "manifest.json"))
    metrics = report.metrics()
    shown = {k: v for k, v in metrics.items()
             if not args.filtered or k.startswith(("f", "macro_f", "micro_f"))}
    for key in sorted(shown):
        print(f"{key}\t{shown[key]:.4f}")
    return 0


def cmd_naive(args) -> int:
    kb = load_dataset(args.dataset)
    if not kb.test:
        raise EvaluationError("test split is empty")
    rels = {ax.args[1] for ax in kb.test}
    if args.relation:
        rel = kb.sig.relation_id(args.relation)
    elif len(rels) == 1:
        rel = next(iter(rels))
    else:
        raise EvaluationError("test split uses several relations; pass --relation")
    tail_pool = kb.pool(args.pool)
    head_pool = kb.pool(args.head_pool) if args.head_pool else tail_pool
    train_axioms = [ax for ax in kb.train_gci2 if ax.args[1] == rel]
    nm = naive_fit(train_axioms, rel, head_pool, tail_pool, symmetric=args.symmetric)
    report = evaluate(nm, kb, pool=args.pool, tie_mode=args.tie_mode)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "naive_report.json"), "w", encoding="utf-8") as f:
            f.write(report.to_json())
            f.write("\n")
        emit_roc(report, os.path.join(args.out, "naive_roc.csv"))
    for key, value in sorted(report.metrics().items()):
        print(f"{key}\t{value:.4f}")
    return 0


def cmd_gen_toy(args) -> int:
    if args.preset not in TOY_PRESETS:
        raise ConfigError(
            f"unknown toy preset: {args.preset!r} (choose from {', '.join(sorted(TOY_PRESETS))})")
    if args.preset == "hierarchy":
        from .toygen import hierarchy_kb
        kb = hierarchy_kb(n_chains=args.chains, depth=args.depth,
                          n_heads=args.heads, density=args.density,
                          seed=args.seed)
    elif args.preset == "scale":
        from .toygen import scale_kb
        kb = scale_kb(n_classes=args.classes or 3000, seed=args.seed)
    else:
        kb = TOY_PRESETS[args.preset](args.seed)
    save_dataset(args.out, kb)
    print(f"wrote {args.preset} dataset to {args.out}")
    for form, count in sorted(kb.form_counts().items()):
        print(f"{form}\t{count}")
    return 0


def _add_config_flags(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", help="bundled preset name")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a single config key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elgeo",
        description="Ball-geometry EL embeddings: normalize, reason, train, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="rewrite general axioms into normal forms")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("reason", help="dump the saturated subsumption pairs")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reason)

    p = sub.add_parser("closure", help="expand and dump the per-form deductive closure")
    p.add_argument("dataset")
    p.add_argument("out")
    p.add_argument("--max-derived", type=int, default=None)
    p.add_argument("--strict-printed-rules", action="store_true")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_closure)

    p = sub.add_parser("train", help="train an embedding on a dataset directory")
    p.add_argument("dataset")
    p.add_argument("out")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("grid", help="hyperparameter sweep ranked by validation mean rank")
    p.add_argument("dataset")
    p.add_argument("out")
    p.add_argument("--grid", action="append", default=[], metavar="NAME=V1,V2",
                   help="override one grid axis")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("evaluate", help="ranking metrics for a trained checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("dataset")
    p.add_argument("--out")
    p.add_argument("--pool")
    p.add_argument("--head-pool")
    p.add_argument("--tie-mode", choices=["optimistic", "average"])
    p.add_argument("--filtered", action="store_true",
                   help="print only the filtered metric block")
    p.add_argument("--closure-positives", action="store_true")
    p.add_argument("--closure-dir", help="directory produced by 'elgeo closure'")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("naive", help="frequency baseline on a dataset")
    p.add_argument("dataset")
    p.add_argument("--relation")
    p.add_argument("--pool")
    p.add_argument("--head-pool")
    p.add_argument("--tie-mode", choices=["optimistic", "average"], default="optimistic")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_naive)

    p = sub.add_parser("gen-toy", help="write a bundled toy dataset")
    p.add_argument("out")
    p.add_argument("--preset", default="basic")
    p.add_argument("--classes", type=int, default=None, help="scale preset size")
    p.add_argument("--chains", type=int, default=6, help="hierarchy preset chains")
    p.add_argument("--depth", type=int, default=8, help="hierarchy chain depth")
    p.add_argument("--heads", type=int, default=12, help="hierarchy head classes")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen_toy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
