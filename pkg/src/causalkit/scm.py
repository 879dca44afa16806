"""Discrete structural causal models over a CausalGraph.

A model binds one conditional probability table to every non-latent node and a
marginal distribution to every latent node (latent nodes are exogenous, so
they must be roots). Exact queries run by enumeration in topological order
with early exit on zero factors; interventions replace a node's table with a
point mass on the mutilated graph; sampling is ancestral, vectorized with
numpy's PCG64 generator and fully determined by the seed.

Enumeration is exponential in the node count, so models are capped at 20
nodes with at most 5 states each.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import DiscreteDataset
from .errors import (
    InvalidCpt,
    ModelTooLarge,
    PartialAssignment,
    PartialOverlap,
    UnknownState,
    ZeroEvidenceProbability,
)
from .graph import CausalGraph, NodeKind, graph_from_dict, graph_to_dict

MAX_NODES = 20
MAX_STATES = 5

Assignment = Mapping[str, str]


@dataclass(frozen=True, eq=True)
class Cpt:
    """P(node | parents) as a dense row per parent-state combination.

    rows maps a tuple of parent states (aligned with `parents`) to the
    distribution over `states`. A root node has the single key ().
    """

    node: str
    parents: tuple[str, ...]
    states: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[float, ...]]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(
            self,
            "rows",
            {tuple(k): tuple(float(p) for p in v) for k, v in self.rows.items()},
        )
        if not self.states:
            raise InvalidCpt(f"{self.node}: empty state list")
        if len(set(self.states)) != len(self.states):
            raise InvalidCpt(f"{self.node}: duplicate states")
        if len(set(self.parents)) != len(self.parents):
            raise InvalidCpt(f"{self.node}: duplicate parents")
        if not self.rows:
            raise InvalidCpt(f"{self.node}: no rows")
        for key, dist in self.rows.items():
            if len(key) != len(self.parents):
                raise InvalidCpt(
                    f"{self.node}: row key {key} does not match parents {self.parents}"
                )
            if len(dist) != len(self.states):
                raise InvalidCpt(
                    f"{self.node}: row {key} has {len(dist)} entries for "
                    f"{len(self.states)} states"
                )
            if any(p < 0.0 for p in dist):
                raise InvalidCpt(f"{self.node}: negative probability in row {key}")
            if abs(sum(dist) - 1.0) > 1e-9:
                raise InvalidCpt(
                    f"{self.node}: row {key} sums to {sum(dist)}, not 1"
                )

    def prob(self, state: str, parent_vals: tuple[str, ...]) -> float:
        if state not in self.states:
            raise UnknownState(self.node, state)
        return self.rows[parent_vals][self.states.index(state)]

    @staticmethod
    def point_mass(node: str, states: Sequence[str], value: str) -> "Cpt":
        states = tuple(states)
        if value not in states:
            raise UnknownState(node, value)
        dist = tuple(1.0 if s == value else 0.0 for s in states)
        return Cpt(node, (), states, {(): dist})


class DiscreteScm:
    """A CausalGraph plus tables: CPTs for non-latent nodes, marginals for
    latent ones."""

    def __init__(
        self,
        graph: CausalGraph,
        cpts: Mapping[str, Cpt],
        latent_dists: Mapping[str, Mapping[str, float]] | None = None,
    ):
        latent_dists = dict(latent_dists or {})
        self.graph = graph
        if len(graph.nodes) > MAX_NODES:
            raise ModelTooLarge(
                f"{len(graph.nodes)} nodes exceeds the {MAX_NODES}-node cap"
            )

        latent = set(graph.nodes_of_kind(NodeKind.LATENT))
        table: dict[str, Cpt] = {}
        for name in graph.node_names():
            if name in latent:
                if name in cpts:
                    raise InvalidCpt(
                        f"latent node {name!r} takes a marginal, not a CPT"
                    )
                if name not in latent_dists:
                    raise InvalidCpt(f"latent node {name!r} has no distribution")
                if graph.parents(name):
                    raise InvalidCpt(
                        f"latent node {name!r} must be exogenous (no parents)"
                    )
                dist = latent_dists[name]
                states = tuple(dist)
                table[name] = Cpt(
                    name, (), states, {(): tuple(dist[s] for s in states)}
                )
            else:
                if name not in cpts:
                    raise InvalidCpt(f"node {name!r} has no CPT")
                cpt = cpts[name]
                if cpt.node != name:
                    raise InvalidCpt(
                        f"CPT under key {name!r} is for node {cpt.node!r}"
                    )
                if cpt.parents != graph.parents(name):
                    raise InvalidCpt(
                        f"{name}: CPT parents {cpt.parents} do not match "
                        f"graph parents {graph.parents(name)}"
                    )
                table[name] = cpt
        extra = (set(cpts) | set(latent_dists)) - set(graph.node_names())
        if extra:
            raise InvalidCpt(f"tables for unknown nodes: {sorted(extra)}")

        for name, cpt in table.items():
            if len(cpt.states) > MAX_STATES:
                raise ModelTooLarge(
                    f"{name}: {len(cpt.states)} states exceeds the "
                    f"{MAX_STATES}-state cap"
                )

        # with all state spaces known, check each CPT covers every
        # combination of its parents' states exactly once
        for name, cpt in table.items():
            expected = set(
                product(*(table[p].states for p in cpt.parents))
            ) if cpt.parents else {()}
            got = set(cpt.rows)
            if got != expected:
                raise InvalidCpt(
                    f"{name}: CPT rows do not cover the parent state space "
                    f"(missing {sorted(expected - got)}, extra {sorted(got - expected)})"
                )
        self._cpts = table

    # -- basics ---------------------------------------------------------

    def cpt(self, name: str) -> Cpt:
        self.graph._require(name)
        return self._cpts[name]

    def states(self, name: str) -> tuple[str, ...]:
        return self.cpt(name).states

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteScm):
            return NotImplemented
        return self.graph == other.graph and self._cpts == other._cpts

    def _check_assignment(self, assignment: Assignment) -> None:
        for node, state in assignment.items():
            self.graph._require(node)
            if state not in self._cpts[node].states:
                raise UnknownState(node, state)

    # -- exact inference ---------------------------------------------------

    def joint_probability(self, assignment: Assignment) -> float:
        """Probability of one complete configuration of all nodes."""
        self._check_assignment(assignment)
        missing = set(self.graph.node_names()) - set(assignment)
        if missing:
            raise PartialAssignment(missing)
        prob = 1.0
        for name in self.graph.topological_order():
            cpt = self._cpts[name]
            parent_vals = tuple(assignment[p] for p in cpt.parents)
            prob *= cpt.prob(assignment[name], parent_vals)
            if prob == 0.0:
                return 0.0
        return prob

    def _event_probability(self, constraints: Assignment) -> float:
        order = self.graph.topological_order()
        cpts = self._cpts
        assign: dict[str, str] = {}

        def rec(i: int) -> float:
            if i == len(order):
                return 1.0
            node = order[i]
            cpt = cpts[node]
            dist = cpt.rows[tuple(assign[p] for p in cpt.parents)]
            if node in constraints:
                state = constraints[node]
                p = dist[cpt.states.index(state)]
                if p == 0.0:
                    return 0.0
                assign[node] = state
                total = p * rec(i + 1)
            else:
                total = 0.0
                for state, p in zip(cpt.states, dist):
                    if p == 0.0:
                        continue
                    assign[node] = state
                    total += p * rec(i + 1)
            del assign[node]
            return total

        return rec(0)

    def probability(self, event: Assignment) -> float:
        """Marginal probability of a partial configuration."""
        self._check_assignment(event)
        return self._event_probability(event)

    def query_conditional(self, target: Assignment, evidence: Assignment) -> float:
        """P(target | evidence) by exact enumeration."""
        self._check_assignment(target)
        self._check_assignment(evidence)
        if not target:
            raise PartialAssignment(set())
        shared = set(target) & set(evidence)
        if shared:
            raise PartialOverlap(shared)
        denom = self._event_probability(evidence)
        if denom == 0.0:
            raise ZeroEvidenceProbability(
                f"evidence {dict(evidence)} has probability zero"
            )
        joint = dict(evidence)
        joint.update(target)
        return self._event_probability(joint) / denom

    # -- interventions ------------------------------------------------------

    def intervene(self, do: Assignment) -> "DiscreteScm":
        """Model after do(X=x): edges into each do-node cut, its table a
        point mass."""
        self._check_assignment(do)
        new_graph = self.graph.mutilate(do)
        latent = set(self.graph.nodes_of_kind(NodeKind.LATENT))
        cpts: dict[str, Cpt] = {}
        latent_dists: dict[str, dict[str, float]] = {}
        for name, cpt in self._cpts.items():
            if name in do:
                cpts[name] = Cpt.point_mass(name, cpt.states, do[name])
            elif name in latent:
                latent_dists[name] = dict(zip(cpt.states, cpt.rows[()]))
            else:
                cpts[name] = cpt
        return DiscreteScm(new_graph, cpts, latent_dists)

    # -- sampling -------------------------------------------------------------

    def sample(
        self, n: int, seed: int, include_latent: bool = False
    ) -> DiscreteDataset:
        """Draw n records by ancestral sampling.

        Latent columns are omitted unless include_latent is set, which is how
        confounded observational data is produced. The generator is numpy's
        PCG64; identical seeds give identical datasets.
        """
        if n < 0:
            raise ValueError("sample size must be nonnegative")
        rng = np.random.default_rng(seed)
        arrays: dict[str, np.ndarray] = {}
        for name in self.graph.topological_order():
            cpt = self._cpts[name]
            k = len(cpt.states)
            if not cpt.parents:
                arrays[name] = rng.choice(k, size=n, p=cpt.rows[()])
                continue
            out = np.zeros(n, dtype=np.int64)
            parent_arrays = [arrays[p] for p in cpt.parents]
            parent_states = [self._cpts[p].states for p in cpt.parents]
            for combo in sorted(cpt.rows):
                mask = np.ones(n, dtype=bool)
                for arr, states, val in zip(parent_arrays, parent_states, combo):
                    mask &= arr == states.index(val)
                count = int(mask.sum())
                if count:
                    out[mask] = rng.choice(k, size=count, p=cpt.rows[combo])
            arrays[name] = out

        emitted = [
            node.name
            for node in self.graph.nodes
            if include_latent or node.kind is not NodeKind.LATENT
        ]
        labeled = {
            name: np.asarray(self._cpts[name].states, dtype=object)[arrays[name]]
            for name in emitted
        }
        rows = list(zip(*(labeled[name] for name in emitted))) if emitted else []
        return DiscreteDataset(
            emitted, rows, {name: self._cpts[name].states for name in emitted}
        )


# -- JSON interchange -----------------------------------------------------------


def _row_key(parents: tuple[str, ...], combo: tuple[str, ...]) -> str:
    return ",".join(f"{p}={v}" for p, v in zip(parents, combo))


def _parse_row_key(key: str, parents: tuple[str, ...]) -> tuple[str, ...]:
    if key == "":
        return ()
    pairs = dict(part.split("=", 1) for part in key.split(","))
    if set(pairs) != set(parents):
        raise InvalidCpt(f"row key {key!r} does not bind parents {parents}")
    return tuple(pairs[p] for p in parents)


def scm_to_dict(scm: DiscreteScm) -> dict:
    payload = graph_to_dict(scm.graph)
    latent = set(scm.graph.nodes_of_kind(NodeKind.LATENT))
    cpts = {}
    latents = {}
    for name in scm.graph.node_names():
        cpt = scm.cpt(name)
        if name in latent:
            latents[name] = {
                "states": list(cpt.states),
                "probs": list(cpt.rows[()]),
            }
        else:
            cpts[name] = {
                "parents": list(cpt.parents),
                "states": list(cpt.states),
                "rows": {
                    _row_key(cpt.parents, combo): list(dist)
                    for combo, dist in sorted(cpt.rows.items())
                },
            }
    payload["cpts"] = cpts
    if latents:
        payload["latent"] = latents
    return payload


def scm_from_dict(payload: dict) -> DiscreteScm:
    graph = graph_from_dict(payload)
    cpts = {}
    for name, spec in payload.get("cpts", {}).items():
        parents = tuple(spec["parents"])
        cpts[name] = Cpt(
            name,
            parents,
            tuple(spec["states"]),
            {
                _parse_row_key(key, parents): tuple(dist)
                for key, dist in spec["rows"].items()
            },
        )
    latent_dists = {
        name: dict(zip(spec["states"], spec["probs"]))
        for name, spec in payload.get("latent", {}).items()
    }
    return DiscreteScm(graph, cpts, latent_dists)


def scm_to_json(scm: DiscreteScm) -> str:
    return json.dumps(scm_to_dict(scm), indent=2)


def scm_from_json(text: str) -> DiscreteScm:
    return scm_from_dict(json.loads(text))
