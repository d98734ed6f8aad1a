"""JSON persistence for learned models.

Layout::

    {"nodes": [{"name", "kind", "parents": [...], "distribution": {...}}, ...],
     "edges": [[parent, child], ...],
     "bins": b, "alpha": a}

Association keys (parent-label tuples) are joined with "|"; labels
containing the delimiter are rejected at serialization time.  Output is
canonical (sorted keys, 2-space indent) so serialize -> parse ->
serialize round-trips byte-identically.
"""
from __future__ import annotations

import json

from .errors import ParameterError
from .graph import Dag
from .parameters import (
    BayesianNetworkModel,
    ConditionalLinearGaussian,
    Cpt,
    LinearGaussian,
)

KEY_DELIMITER = "|"


def _join_key(labels: tuple[str, ...]) -> str:
    for lab in labels:
        if KEY_DELIMITER in lab:
            raise ParameterError(
                f"label {lab!r} contains the reserved delimiter {KEY_DELIMITER!r}"
            )
    return KEY_DELIMITER.join(labels)


def _split_key(key: str) -> tuple[str, ...]:
    return tuple(key.split(KEY_DELIMITER)) if key else ()


def _lg_to_dict(lg: LinearGaussian) -> dict:
    return {
        "intercept": lg.intercept,
        "coefficients": dict(lg.coefficients),
        "residual_variance": lg.residual_variance,
        "marginal_mean": lg.marginal_mean,
        "marginal_variance": lg.marginal_variance,
    }


def _lg_from_dict(obj: dict) -> LinearGaussian:
    return LinearGaussian(
        obj["intercept"],
        dict(obj["coefficients"]),
        obj["residual_variance"],
        obj["marginal_mean"],
        obj["marginal_variance"],
    )


def _distribution_to_dict(dist) -> dict:
    if isinstance(dist, Cpt):
        return {
            "type": "cpt",
            "states": list(dist.states),
            "table": {_join_key(cfg): list(probs) for cfg, probs in dist.table.items()},
        }
    if isinstance(dist, ConditionalLinearGaussian):
        return {
            "type": "clg",
            "table": {_join_key(cfg): _lg_to_dict(lg) for cfg, lg in dist.table.items()},
            "fallback": _lg_to_dict(dist.fallback),
        }
    if isinstance(dist, LinearGaussian):
        return {"type": "lg", **_lg_to_dict(dist)}
    raise ParameterError(f"unknown distribution type {type(dist).__name__}")


def _distribution_from_dict(obj: dict):
    kind = obj.get("type")
    if kind == "cpt":
        return Cpt(
            tuple(obj["states"]),
            {_split_key(k): tuple(v) for k, v in obj["table"].items()},
        )
    if kind == "clg":
        return ConditionalLinearGaussian(
            {_split_key(k): _lg_from_dict(v) for k, v in obj["table"].items()},
            _lg_from_dict(obj["fallback"]),
        )
    if kind == "lg":
        return _lg_from_dict(obj)
    raise ParameterError(f"unknown distribution type tag {kind!r}")


def model_to_dict(model: BayesianNetworkModel) -> dict:
    nodes = []
    for name in model.dag.nodes:
        nodes.append(
            {
                "name": name,
                "kind": model.node_kind[name],
                "parents": model.parents_in_order(name),
                "distribution": _distribution_to_dict(model.distributions[name]),
            }
        )
    edges = sorted(model.dag.edges)
    return {
        "nodes": nodes,
        "edges": [list(e) for e in edges],
        "bins": model.bins,
        "alpha": model.alpha,
    }


def model_from_dict(obj: dict) -> BayesianNetworkModel:
    names = tuple(n["name"] for n in obj["nodes"])
    dag = Dag(names, frozenset((p, c) for p, c in obj["edges"]))
    kinds = {n["name"]: n["kind"] for n in obj["nodes"]}
    dists = {n["name"]: _distribution_from_dict(n["distribution"]) for n in obj["nodes"]}
    return BayesianNetworkModel(dag, kinds, dists, obj["bins"], obj["alpha"])


def dumps(model: BayesianNetworkModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> BayesianNetworkModel:
    return model_from_dict(json.loads(text))


def save(model: BayesianNetworkModel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load(path: str) -> BayesianNetworkModel:
    with open(path) as fh:
        return loads(fh.read())
