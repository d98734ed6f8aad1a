"""Forward sampling with evidence, missing-value restoration, anomaly scoring.

Sampling walks nodes in topological order; evidence nodes are clamped to
their observed values, everything else is drawn from its node
distribution given the realized parent values.  Unseen parent
configurations never abort a chain: CPT nodes fall back to a uniform draw
over their states and conditional linear-Gaussian nodes fall back to
their whole-column parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataset import CATEGORICAL, CONTINUOUS, Value
from .errors import InferenceError
from .parameters import (
    BayesianNetworkModel,
    ConditionalLinearGaussian,
    Cpt,
    LinearGaussian,
)

Evidence = Mapping[str, Value]


@dataclass(frozen=True)
class SampleSet:
    """Per-node sample columns; every column has exactly m entries."""

    columns: Mapping[str, list]
    m: int


def validate_evidence(model: BayesianNetworkModel, ev: Evidence) -> None:
    for name, value in ev.items():
        if name not in model.dag.nodes:
            raise InferenceError(f"evidence names unknown node {name!r}")
        if value is None:
            raise InferenceError(f"evidence for {name!r} is missing-valued")
        kind = model.node_kind[name]
        if kind == CATEGORICAL:
            if not isinstance(value, str):
                raise InferenceError(f"evidence for categorical {name!r} must be a label")
            dist = model.distributions[name]
            if isinstance(dist, Cpt) and value not in dist.states:
                raise InferenceError(
                    f"evidence label {value!r} unknown to node {name!r} "
                    f"(known: {list(dist.states)})"
                )
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InferenceError(f"evidence for continuous {name!r} must be a number")
            if not math.isfinite(float(value)):
                raise InferenceError(f"evidence for {name!r} is non-finite")


def sanitize_evidence(
    model: BayesianNetworkModel, ev: Evidence
) -> tuple[dict[str, Value], list[str]]:
    """Split evidence into the valid part and the names of dropped entries.

    Used by batch harnesses where a held-out record may carry labels the
    locally trained model never saw.
    """
    valid: dict[str, Value] = {}
    dropped: list[str] = []
    for name, value in ev.items():
        try:
            validate_evidence(model, {name: value})
        except InferenceError:
            dropped.append(name)
        else:
            valid[name] = value
    return valid, dropped


def forward_sample(
    model: BayesianNetworkModel, ev: Evidence, m: int, seed: int
) -> SampleSet:
    """Draw m ancestral samples with evidence nodes clamped.

    The seed fully determines the output.
    """
    if m <= 0:
        raise InferenceError(f"sample count must be positive, got {m}")
    validate_evidence(model, ev)
    rng = np.random.default_rng(seed)
    order = model.dag.topological_order()
    columns: dict[str, list] = {n: [] for n in model.dag.nodes}
    for _ in range(m):
        current: dict[str, Value] = {}
        for node in order:
            if node in ev:
                value = float(ev[node]) if model.node_kind[node] == CONTINUOUS else ev[node]
            else:
                value = _draw(model, node, current, rng)
            current[node] = value
            columns[node].append(value)
    return SampleSet(columns, m)


def _draw(model: BayesianNetworkModel, node: str, current: Mapping[str, Value], rng) -> Value:
    dist = model.distributions[node]
    if isinstance(dist, Cpt):
        cfg = tuple(current[p] for p in model.parents_in_order(node))
        probs = dist.table.get(cfg)
        u = rng.random()
        if probs is None:
            # configuration never observed in training: uniform over states
            return dist.states[min(int(u * len(dist.states)), len(dist.states) - 1)]
        acc = 0.0
        for state, p in zip(dist.states, probs):
            acc += p
            if u <= acc:
                return state
        return dist.states[-1]
    if isinstance(dist, ConditionalLinearGaussian):
        combo = tuple(current[p] for p in model.discrete_parents(node))
        lg = dist.for_combination(combo)
    else:
        lg = dist
    mean = lg.intercept + sum(
        coef * current[p] for p, coef in lg.coefficients.items()
    )
    std = math.sqrt(max(lg.residual_variance, 0.0))
    return float(mean + std * rng.standard_normal()) if std > 0 else float(mean)


def restore(
    model: BayesianNetworkModel,
    record: Mapping[str, Value],
    m: int,
    seed: int,
) -> dict[str, Value]:
    """Fill the missing fields of a partial record from a conditioned sample.

    Categorical gaps take the sample mode (ties by label order),
    continuous gaps the sample mean; observed fields pass through.
    """
    unknown = set(record) - set(model.dag.nodes)
    if unknown:
        raise InferenceError(f"record names unknown nodes {sorted(unknown)}")
    missing = [n for n in model.dag.nodes if record.get(n) is None]
    if not missing:
        raise InferenceError("record has no missing fields; nothing to restore")
    ev = {k: v for k, v in record.items() if v is not None}
    samples = forward_sample(model, ev, m, seed)
    out: dict[str, Value] = dict(record)
    for node in missing:
        drawn = samples.columns[node]
        if model.node_kind[node] == CATEGORICAL:
            counts: dict[str, int] = {}
            for v in drawn:
                counts[v] = counts.get(v, 0) + 1
            out[node] = min(counts, key=lambda s: (-counts[s], s))
        else:
            out[node] = float(np.mean(drawn))
    return out


def anomaly_score(
    model: BayesianNetworkModel,
    record: Mapping[str, Value],
    target: str,
    m: int,
    seed: int,
) -> tuple[float, bool]:
    """Standardized distance of the target value from its conditional sample.

    Returns (score, flag); the flag trips when the value lies outside two
    standard deviations of the sample.
    """
    if target not in model.dag.nodes:
        raise InferenceError(f"unknown target node {target!r}")
    if model.node_kind[target] != CONTINUOUS:
        raise InferenceError(f"target {target!r} is not continuous")
    value = record.get(target)
    if value is None:
        raise InferenceError(f"target {target!r} is missing in the record")
    ev = {k: v for k, v in record.items() if k != target and v is not None}
    samples = forward_sample(model, ev, m, seed)
    drawn = np.asarray(samples.columns[target], dtype=float)
    mean = float(drawn.mean())
    std = float(drawn.std())
    if std == 0.0:
        score = 0.0 if value == mean else math.inf
    else:
        score = abs(float(value) - mean) / std
    return score, score > 2.0
