"""Selection-bias detection, stratified de-biasing, and effect transport.

Selection into a study is modeled as conditioning on Selection-kind nodes.
`detect_selection_bias` reports backdoor paths that run through a selection
node and whether conditioning on selection unblocks them (collider opening).
`stratified_debias` re-weights stratum conditionals measured under selection
by stratum frequencies measured on everyone; `transport_estimate` carries a
per-stratum effect from a source population to a target via target stratum
weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .data import DiscreteDataset
from .errors import (
    EmptySelection,
    EmptyStratum,
    UnknownState,
    WeightMismatch,
    WeightsNotNormalized,
)
from .graph import CausalGraph, NodeKind, Path


@dataclass(frozen=True)
class PathAssessment:
    path: Path
    blocked_unconditioned: bool
    blocked_under_selection: bool


@dataclass(frozen=True)
class SelectionReport:
    """Backdoor paths from x to y that pass through selection nodes.

    `biased` is set when at least one such path is open once all selection
    nodes are conditioned on (i.e. within the selected sample).
    """

    x: str
    y: str
    selection_nodes: tuple[str, ...]
    paths: tuple[PathAssessment, ...]
    biased: bool


def detect_selection_bias(graph: CausalGraph, x: str, y: str) -> SelectionReport:
    selection = graph.nodes_of_kind(NodeKind.SELECTION)
    assessments = []
    for path in graph.backdoor_paths(x, y):
        if not any(node in selection for node in path.nodes[1:-1]):
            continue
        assessments.append(
            PathAssessment(
                path=path,
                blocked_unconditioned=graph.is_path_blocked(path, ()),
                blocked_under_selection=graph.is_path_blocked(path, selection),
            )
        )
    biased = any(not a.blocked_under_selection for a in assessments)
    return SelectionReport(
        x=x,
        y=y,
        selection_nodes=selection,
        paths=tuple(assessments),
        biased=biased,
    )


def stratified_debias(
    ds: DiscreteDataset,
    x: str,
    x_val: str,
    y: str,
    y_val: str,
    strata: Sequence[str],
) -> float:
    """Σ over strata of P(y | x, strata) · P(strata | x).

    Each factor is complete-case over exactly the columns it mentions, so on
    a selection-masked dataset (outcome Missing off-study, covariates always
    observed) the conditionals come from the study sample while the weights
    come from the whole population. On fully observed data this reduces to
    the plain conditional P(y | x).
    """
    if x_val not in ds.column_states(x):
        raise UnknownState(x, x_val)
    if y_val not in ds.column_states(y):
        raise UnknownState(y, y_val)
    scols = list(strata)

    base = [r for r in ds.project([x] + scols) if r[0] == x_val]
    if not base:
        raise EmptySelection(f"no rows with {x}={x_val} complete over {scols}")
    weight_counts: dict[tuple, int] = {}
    for r in base:
        weight_counts[r[1:]] = weight_counts.get(r[1:], 0) + 1
    n_base = len(base)

    outcome_rows = [
        r for r in ds.project([x, y] + scols) if r[0] == x_val
    ]
    cond_hits: dict[tuple, int] = {}
    cond_totals: dict[tuple, int] = {}
    for r in outcome_rows:
        sv = r[2:]
        cond_totals[sv] = cond_totals.get(sv, 0) + 1
        if r[1] == y_val:
            cond_hits[sv] = cond_hits.get(sv, 0) + 1

    total = 0.0
    for sv in sorted(weight_counts):
        if cond_totals.get(sv, 0) == 0:
            raise EmptyStratum({x: x_val} | dict(zip(scols, sv)))
        conditional = cond_hits.get(sv, 0) / cond_totals[sv]
        total += conditional * (weight_counts[sv] / n_base)
    return total


@dataclass(frozen=True)
class StratumEffects:
    """A stratified effect in a source population plus target-population
    stratum weights."""

    stratum: str
    effects: Mapping[str, float]
    weights: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "effects", dict(self.effects))
        object.__setattr__(self, "weights", dict(self.weights))

    def to_dict(self) -> dict:
        return {
            "stratum": self.stratum,
            "effects": dict(sorted(self.effects.items())),
            "weights": dict(sorted(self.weights.items())),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "StratumEffects":
        return cls(payload["stratum"], payload["effects"], payload["weights"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "StratumEffects":
        return cls.from_dict(json.loads(text))


def transport_estimate(se: StratumEffects) -> float:
    """Weighted recombination Σ_s effect(s) · weight(s).

    Weights must already be the target population's distribution: they are
    validated (nonnegative, summing to 1 within 1e-9), never renormalized.
    """
    if set(se.effects) != set(se.weights):
        raise WeightMismatch(
            f"effect strata {sorted(se.effects)} != weight strata {sorted(se.weights)}"
        )
    if any(w < 0 for w in se.weights.values()):
        raise WeightsNotNormalized("negative weight")
    total_w = sum(se.weights.values())
    if abs(total_w - 1.0) > 1e-9:
        raise WeightsNotNormalized(f"weights sum to {total_w}, not 1")
    return sum(se.effects[k] * se.weights[k] for k in sorted(se.effects))
