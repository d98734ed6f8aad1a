"""Command-line surface: learn, restore, analogues, anomalies, eval, export-dot.

Every command writes its outputs plus a run manifest (resolved config,
seed, input digests, tool version, duration) next to the primary output.
Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from .dataset import CONTINUOUS, Dataset, load_csv, load_schema, select_rows
from .errors import MixbnError
from .evaluation import REGIMES, EvalConfig, format_report, run_eval
from .graph import EdgeConstraints
from .inference import anomaly_score, restore
from .model_io import load as load_model
from .model_io import save as save_model
from .parameters import mixlearn
from .similarity import (
    GOWER_WEIGHTED,
    METRICS,
    AnalogueQuery,
    DistanceSpec,
    nearest_analogues,
    penalty_weights,
)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: str, command: str, config: dict, inputs: list[str], started: float) -> None:
    config = {k: v for k, v in config.items() if k not in ("func", "command")}
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": {p: _digest(p) for p in inputs},
        "version": __version__,
        "duration_seconds": round(time.monotonic() - started, 3),
    }
    with open(out + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_data(args) -> Dataset:
    schema = load_schema(args.schema)
    return load_csv(args.data, schema)


def _load_record(path: str, d_schema) -> dict:
    with open(path) as fh:
        rec = json.load(fh)
    if not isinstance(rec, dict):
        raise MixbnError(f"{path}: record must be a JSON object")
    return rec


def _record_to_row(record: dict, dataset: Dataset) -> tuple:
    unknown = set(record) - set(dataset.names)
    if unknown:
        raise MixbnError(f"record names unknown columns {sorted(unknown)}")
    row = []
    for col in dataset.schema:
        v = record.get(col.name)
        if v is not None and col.kind == CONTINUOUS:
            v = float(v)
        row.append(v)
    return tuple(row)


def _expert_constraints(args) -> EdgeConstraints:
    if not getattr(args, "expert_edges", None):
        return EdgeConstraints()
    with open(args.expert_edges) as fh:
        edges = json.load(fh)
    return EdgeConstraints(
        frozenset((p, c) for p, c in edges),
        removable=bool(getattr(args, "allow_remove_expert_edges", False)),
    )


def _metric_spec(args, dataset: Dataset) -> DistanceSpec:
    metric = args.metric.replace("-", "_")
    if metric not in METRICS:
        raise MixbnError(f"unknown metric {args.metric!r} (choose from {list(METRICS)})")
    weights = {}
    if metric == GOWER_WEIGHTED:
        if args.weight is not None:
            weight = args.weight
        else:
            _, weight = penalty_weights(dataset, seed=args.seed)
        weights = {
            c.name: (weight if c.kind == CONTINUOUS else 1.0) for c in dataset.schema
        }
    epsilon = args.epsilon if metric == "filter" else None
    return DistanceSpec(metric, weights=weights, epsilon=epsilon)


def cmd_learn(args) -> int:
    started = time.monotonic()
    d = _load_data(args)
    constraints = _expert_constraints(args)
    model = mixlearn(
        d,
        constraints=constraints,
        bins=args.bins,
        max_parents=args.max_parents,
    )
    save_model(model, args.out)
    inputs = [args.data, args.schema] + ([args.expert_edges] if args.expert_edges else [])
    _write_manifest(args.out, "learn", vars(args).copy(), inputs, started)
    return 0


def _obtain_model(args, need_record_row=False):
    """Model from --model, or trained on the analogues of --record from --data."""
    inputs = []
    if args.model:
        model = load_model(args.model)
        inputs.append(args.model)
        dataset = None
    else:
        if not (args.data and args.schema):
            raise MixbnError("provide either --model or both --data and --schema")
        dataset = _load_data(args)
        inputs.extend([args.data, args.schema])
        record = _load_record(args.record, dataset.schema)
        if args.metric:
            spec = _metric_spec(args, dataset)
            row = _record_to_row(record, dataset)
            idxs = nearest_analogues(AnalogueQuery(row, spec, args.n_analogues), dataset)
            train = select_rows(dataset, idxs)
        else:
            train = dataset
        model = mixlearn(train, bins=args.bins, max_parents=args.max_parents)
    return model, inputs


def cmd_restore(args) -> int:
    started = time.monotonic()
    model, inputs = _obtain_model(args)
    with open(args.record) as fh:
        record = json.load(fh)
    inputs.append(args.record)
    for node in model.dag.nodes:
        record.setdefault(node, None)
    completed = restore(model, record, args.samples, args.seed)
    with open(args.out, "w") as fh:
        json.dump(completed, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest(args.out, "restore", vars(args).copy(), inputs, started)
    return 0


def cmd_analogues(args) -> int:
    started = time.monotonic()
    dataset = _load_data(args)
    record = _load_record(args.record, dataset.schema)
    row = _record_to_row(record, dataset)
    spec = _metric_spec(args, dataset)
    idxs = nearest_analogues(AnalogueQuery(row, spec, args.n_analogues), dataset)
    with open(args.out, "w") as fh:
        json.dump({"metric": args.metric, "indices": idxs}, fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, "analogues", vars(args).copy(), [args.data, args.schema, args.record], started)
    return 0


def cmd_anomalies(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    with open(args.record) as fh:
        record = json.load(fh)
    score, flag = anomaly_score(model, record, args.target, args.samples, args.seed)
    with open(args.out, "w") as fh:
        json.dump(
            {"target": args.target, "score": score if score != float("inf") else "inf",
             "is_anomaly": flag},
            fh, indent=2,
        )
        fh.write("\n")
    _write_manifest(args.out, "anomalies", vars(args).copy(), [args.model, args.record], started)
    return 0


def cmd_eval(args) -> int:
    started = time.monotonic()
    d = _load_data(args)
    cfg = EvalConfig(
        regimes=tuple(r.replace("-", "_") for r in args.regimes),
        n_analogues=args.n_analogues,
        bins=args.bins,
        max_parents=args.max_parents,
        m_samples=args.samples,
        seed=args.seed,
        anomaly_fraction=args.anomaly_fraction,
        epsilon=args.epsilon,
        gower_weight=args.weight,
        max_rows=args.max_rows,
        train_on_perturbed=args.train_on_perturbed,
    )
    report = run_eval(d, cfg)
    with open(args.out, "w") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    sys.stdout.write(format_report(report))
    _write_manifest(args.out, "eval", {**vars(args), "regimes": list(cfg.regimes)},
                    [args.data, args.schema], started)
    return 0


def cmd_export_dot(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    lines = ["digraph model {"]
    for node in model.dag.nodes:
        color = "red" if model.node_kind[node] == CONTINUOUS else "lightblue"
        lines.append(f'  "{node}" [style=filled, fillcolor={color}];')
    for p, c in sorted(model.dag.edges):
        lines.append(f'  "{p}" -> "{c}";')
    lines.append("}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(args.out, "export-dot", vars(args).copy(), [args.model], started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixbn",
        description="Bayesian-network learning, restoration, analogue search and anomaly detection for mixed-type tables",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data(p):
        p.add_argument("--data", required=True, help="CSV file with header row")
        p.add_argument("--schema", required=True, help="JSON column schema")

    def add_learn_opts(p):
        p.add_argument("--bins", type=int, default=5)
        p.add_argument("--max-parents", type=int, default=4)

    p = sub.add_parser("learn", help="learn a model from a dataset")
    add_data(p)
    add_learn_opts(p)
    p.add_argument("--expert-edges", help="JSON list of [parent, child] pairs")
    p.add_argument("--allow-remove-expert-edges", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("restore", help="fill missing fields of a record")
    p.add_argument("--model", help="learned model JSON")
    p.add_argument("--data", help="CSV pool for on-the-fly analogue training")
    p.add_argument("--schema", help="JSON column schema (with --data)")
    p.add_argument("--record", required=True, help="record JSON with null for missing")
    p.add_argument("--metric", help="train on analogues under this metric")
    p.add_argument("--n-analogues", type=int, default=40)
    p.add_argument("--weight", type=float, help="continuous-column weight for gower-weighted")
    p.add_argument("--epsilon", type=float, default=0.1)
    add_learn_opts(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("analogues", help="rank nearest analogues of a record")
    add_data(p)
    p.add_argument("--record", required=True)
    p.add_argument("--metric", default="gower")
    p.add_argument("--n-analogues", type=int, default=40)
    p.add_argument("--weight", type=float)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analogues)

    p = sub.add_parser("anomalies", help="score one record's target parameter")
    p.add_argument("--model", required=True)
    p.add_argument("--record", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anomalies)

    p = sub.add_parser("eval", help="run the full evaluation harness")
    add_data(p)
    p.add_argument("--regimes", nargs="+", default=list(REGIMES))
    p.add_argument("--n-analogues", type=int, default=40)
    add_learn_opts(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--anomaly-fraction", type=float, default=0.10)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--weight", type=float)
    p.add_argument("--max-rows", type=int, help="evaluate a seeded subsample of rows")
    p.add_argument("--train-on-perturbed", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-dot", help="write the model graph as DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MixbnError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - invariant violations
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
