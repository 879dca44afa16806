"""Constraint-based and score-based structure learning for categorical data.

`ci_test` is a stratified Pearson chi-square test: one contingency table per
conditioning-set stratum, statistics and degrees of freedom summed across
strata, and a hard InsufficientData error whenever an expected cell falls
below the minimum count. `pc_skeleton`/`orient` implement the PC loop with
conditioning sets drawn from current adjacencies (sizes 0..max), v-structure
orientation with conflict reporting, and the away-from-collider propagation
rule. `greedy_score_search` hill-climbs DAGs under the discrete BIC score,
adding single edges while any addition helps, then deleting likewise.

Everything is deterministic: variables, edges, and candidate conditioning
sets are always processed in lexicographic order, and family scores are
computed from one canonical count cache so score ties between symmetric
candidates are exact and broken lexicographically.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence

from scipy.stats import chi2

from .data import DiscreteDataset
from .errors import EmptySelection, InsufficientData, SchemaMismatch
from .graph import CausalGraph, Node, NodeKind


@dataclass(frozen=True)
class CiResult:
    x: str
    y: str
    z: tuple[str, ...]
    statistic: float
    dof: int
    p_value: float
    alpha: float
    independent: bool


def ci_test(
    ds: DiscreteDataset,
    x: str,
    y: str,
    z: Sequence[str] = (),
    alpha: float = 0.05,
    min_expected: float = 5.0,
) -> CiResult:
    """Stratified chi-square test of x ⫫ y given z.

    Strata in which x or y is constant contribute nothing; if every stratum
    is degenerate the statement is vacuously independent (p = 1).
    """
    if x == y:
        raise SchemaMismatch("x and y must differ")
    zcols = sorted(z)
    rows = ds.project([x, y] + zcols)
    if not rows:
        raise EmptySelection(f"no complete rows over {[x, y] + zcols}")

    strata: dict[tuple, Counter] = {}
    for r in rows:
        strata.setdefault(r[2:], Counter())[(r[0], r[1])] += 1

    statistic = 0.0
    dof = 0
    for zv in sorted(strata):
        table = strata[zv]
        xs = sorted({k[0] for k in table})
        ys = sorted({k[1] for k in table})
        if len(xs) < 2 or len(ys) < 2:
            continue
        n_s = sum(table.values())
        row_tot = {xv: sum(table[(xv, yv)] for yv in ys) for xv in xs}
        col_tot = {yv: sum(table[(xv, yv)] for xv in xs) for yv in ys}
        for xv in xs:
            for yv in ys:
                expected = row_tot[xv] * col_tot[yv] / n_s
                if expected < min_expected:
                    raise InsufficientData(
                        f"expected count {expected:.2f} < {min_expected} for "
                        f"({x}={xv}, {y}={yv}) in stratum {dict(zip(zcols, zv))}"
                    )
                observed = table[(xv, yv)]
                statistic += (observed - expected) ** 2 / expected
        dof += (len(xs) - 1) * (len(ys) - 1)

    p_value = float(chi2.sf(statistic, dof)) if dof > 0 else 1.0
    return CiResult(
        x=x,
        y=y,
        z=tuple(zcols),
        statistic=statistic,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        independent=p_value > alpha,
    )


@dataclass(frozen=True)
class Pattern:
    """A partially directed graph: skeleton edges split into directed and
    undirected parts. `conflicts` lists pairs left undirected because two
    v-structures demanded opposite directions."""

    nodes: tuple[str, ...]
    undirected: frozenset[tuple[str, str]]
    directed: frozenset[tuple[str, str]]
    conflicts: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for a, b in self.undirected:
            if a >= b:
                raise SchemaMismatch("undirected pairs must be stored sorted")
        skeleton_dir = {tuple(sorted(e)) for e in self.directed}
        if skeleton_dir & set(self.undirected):
            raise SchemaMismatch("an edge cannot be both directed and undirected")

    def skeleton(self) -> frozenset[tuple[str, str]]:
        return frozenset(
            set(self.undirected) | {tuple(sorted(e)) for e in self.directed}
        )

    def adjacent(self, a: str, b: str) -> bool:
        return tuple(sorted((a, b))) in self.skeleton()

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "undirected": [list(e) for e in sorted(self.undirected)],
            "directed": [list(e) for e in sorted(self.directed)],
            "conflicts": [list(e) for e in self.conflicts],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Pattern":
        return cls(
            nodes=tuple(payload["nodes"]),
            undirected=frozenset(tuple(e) for e in payload["undirected"]),
            directed=frozenset(tuple(e) for e in payload["directed"]),
            conflicts=tuple(tuple(e) for e in payload.get("conflicts", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Pattern":
        return cls.from_dict(json.loads(text))

    def to_dot(self) -> str:
        lines = ["digraph pattern {"]
        for n in self.nodes:
            lines.append(f"  {n};")
        for a, b in sorted(self.directed):
            lines.append(f"  {a} -> {b};")
        for a, b in sorted(self.undirected):
            lines.append(f"  {a} -> {b} [dir=none];")
        lines.append("}")
        return "\n".join(lines)


SepSets = dict[frozenset, frozenset]
CiFn = Callable[[str, str, tuple[str, ...]], bool]


def pc_skeleton(
    ds: Optional[DiscreteDataset] = None,
    alpha: float = 0.05,
    max_cond_size: int = 3,
    min_expected: float = 5.0,
    ci_fn: Optional[CiFn] = None,
    variables: Optional[Sequence[str]] = None,
) -> tuple[Pattern, SepSets]:
    """PC adjacency search: start complete, remove edges found independent.

    Conditioning sets of sizes 0..max_cond_size are drawn from the current
    adjacencies of each endpoint, in lexicographic order. Supply `ci_fn`
    (returning True for independence) to run against an oracle instead of
    data; InsufficientData from the data-driven test propagates.
    """
    if ci_fn is None:
        if ds is None:
            raise SchemaMismatch("need a dataset or an independence callable")

        def ci_fn(a: str, b: str, cond: tuple[str, ...]) -> bool:
            return ci_test(
                ds, a, b, cond, alpha=alpha, min_expected=min_expected
            ).independent

    if variables is None:
        if ds is None:
            raise SchemaMismatch("need explicit variables with a bare ci_fn")
        variables = ds.columns
    names = sorted(variables)

    adj: dict[str, set[str]] = {v: set(names) - {v} for v in names}
    sepsets: SepSets = {}

    for level in range(max_cond_size + 1):
        for a, b in [
            (a, b) for a, b in combinations(names, 2) if b in adj[a]
        ]:
            severed = False
            for side, other in ((a, b), (b, a)):
                candidates = sorted(adj[side] - {other})
                if len(candidates) < level:
                    continue
                for cond in combinations(candidates, level):
                    if ci_fn(a, b, cond):
                        adj[a].discard(b)
                        adj[b].discard(a)
                        sepsets[frozenset((a, b))] = frozenset(cond)
                        severed = True
                        break
                if severed:
                    break

    undirected = frozenset(
        (a, b) for a, b in combinations(names, 2) if b in adj[a]
    )
    return Pattern(tuple(names), undirected, frozenset()), sepsets


def orient(skeleton: Pattern, sepsets: SepSets) -> Pattern:
    """Orient v-structures, then propagate away-from-collider orientations.

    An unshielded triple a - c - b with c outside sepset(a, b) demands
    a -> c <- b. Opposite demands on one edge are reported in `conflicts`
    and the edge stays undirected, exempt from propagation. Afterwards,
    any undirected a - b with some directed c -> a and c, b non-adjacent
    is oriented a -> b unless that would close a directed cycle.
    """
    nodes = skeleton.nodes
    undirected = {tuple(e) for e in skeleton.undirected}
    directed: set[tuple[str, str]] = set(skeleton.directed)

    neighbor: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in skeleton.skeleton():
        neighbor[a].add(b)
        neighbor[b].add(a)

    demands: set[tuple[str, str]] = set()
    for c in nodes:
        for a, b in combinations(sorted(neighbor[c]), 2):
            if b in neighbor[a]:
                continue
            sep = sepsets.get(frozenset((a, b)))
            if sep is None or c in sep:
                continue
            demands.add((a, c))
            demands.add((b, c))

    conflicts = []
    frozen: set[tuple[str, str]] = set()
    for a, b in sorted(demands):
        if (b, a) in demands:
            if a < b:
                conflicts.append((a, b))
                frozen.add((a, b))
            continue
        pair = tuple(sorted((a, b)))
        if pair in undirected:
            undirected.discard(pair)
            directed.add((a, b))

    def creates_cycle(tail: str, head: str) -> bool:
        stack = [head]
        seen = set()
        while stack:
            cur = stack.pop()
            if cur == tail:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(h for t, h in directed if t == cur)
        return False

    changed = True
    while changed:
        changed = False
        for a, b in sorted(undirected):
            if (a, b) in frozen:
                continue
            oriented = None
            for tail, head in ((a, b), (b, a)):
                if any(
                    (c, tail) in directed and c not in neighbor[head]
                    for c in sorted(neighbor[tail])
                ):
                    if not creates_cycle(tail, head):
                        oriented = (tail, head)
                    break
            if oriented:
                undirected.discard((a, b))
                directed.add(oriented)
                changed = True

    return Pattern(
        nodes,
        frozenset(undirected),
        frozenset(directed),
        tuple(sorted(conflicts)),
    )


def pc(
    ds: Optional[DiscreteDataset] = None,
    alpha: float = 0.05,
    max_cond_size: int = 3,
    min_expected: float = 5.0,
    ci_fn: Optional[CiFn] = None,
    variables: Optional[Sequence[str]] = None,
) -> Pattern:
    """Skeleton search followed by orientation."""
    skeleton, sepsets = pc_skeleton(
        ds,
        alpha=alpha,
        max_cond_size=max_cond_size,
        min_expected=min_expected,
        ci_fn=ci_fn,
        variables=variables,
    )
    return orient(skeleton, sepsets)


def dsep_ci_fn(graph: CausalGraph) -> CiFn:
    """Independence oracle from a known graph, for soundness checks."""

    def fn(a: str, b: str, cond: tuple[str, ...]) -> bool:
        return graph.is_d_separated({a}, {b}, set(cond))

    return fn


# -- score-based search -----------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    op: str
    edge: Optional[tuple[str, str]]
    score: float


def bic_family_score(
    counts: Counter,
    parent_counts: Counter,
    n: int,
    child_states: int,
    parent_space: int,
) -> float:
    """Log-likelihood of one node's multinomial family minus the BIC penalty.

    counts: joint counts over (parents..., child); parent_counts: the same
    marginalized over the child. The penalty is (ln n / 2) per free
    parameter, (child_states - 1) · parent_space in total.
    """
    ll = 0.0
    for key, c in counts.items():
        ll += c * math.log(c / parent_counts[key[:-1]])
    return ll - 0.5 * math.log(n) * (child_states - 1) * parent_space


class _BicCache:
    """Canonical Σ c·ln c per variable subset, so family log-likelihoods of
    symmetric candidates are identical float expressions."""

    def __init__(self, ds: DiscreteDataset):
        names = sorted(ds.columns)
        rows = ds.project(names)
        if not rows:
            raise EmptySelection("no complete rows")
        self.names = names
        self.n = len(rows)
        self.states = {v: ds.column_states(v) for v in names}
        self.full = Counter(rows)
        self._cache: dict[frozenset, float] = {}

    def _counts(self, subset: tuple[str, ...]) -> Counter:
        idx = [self.names.index(v) for v in subset]
        out: Counter = Counter()
        for key, c in self.full.items():
            out[tuple(key[i] for i in idx)] += c
        return out

    def log_count_sum(self, subset: frozenset) -> float:
        if subset not in self._cache:
            ordered = tuple(sorted(subset))
            counts = self._counts(ordered)
            self._cache[subset] = sum(
                c * math.log(c) for _, c in sorted(counts.items())
            )
        return self._cache[subset]

    def family_score(self, child: str, parents: frozenset) -> float:
        ll = self.log_count_sum(parents | {child}) - (
            self.log_count_sum(parents)
            if parents
            else self.n * math.log(self.n)
        )
        space = math.prod(len(self.states[p]) for p in parents)
        params = (len(self.states[child]) - 1) * space
        return ll - 0.5 * math.log(self.n) * params


def greedy_score_search(
    ds: DiscreteDataset,
) -> tuple[CausalGraph, tuple[TraceStep, ...]]:
    """Greedy DAG hill-climb under discrete BIC.

    Starts empty; repeatedly adds the best strictly-improving edge
    (acyclicity-preserving, ties broken lexicographically), then repeatedly
    deletes the best strictly-improving edge. Requires complete rows.
    """
    cache = _BicCache(ds)
    names = cache.names
    parents: dict[str, frozenset] = {v: frozenset() for v in names}
    family: dict[str, float] = {
        v: cache.family_score(v, frozenset()) for v in names
    }
    total = sum(family[v] for v in names)
    trace = [TraceStep("init", None, total)]

    children: dict[str, set[str]] = {v: set() for v in names}

    def reachable(src: str, dst: str) -> bool:
        stack = [src]
        seen = set()
        while stack:
            cur = stack.pop()
            if cur == dst:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(children[cur])
        return False

    while True:
        best_gain = 0.0
        best_edge = None
        best_score = 0.0
        for u, v in (
            (u, v)
            for u in names
            for v in names
            if u != v and u not in parents[v]
        ):
            if reachable(v, u):
                continue
            candidate = cache.family_score(v, parents[v] | {u})
            gain = candidate - family[v]
            if gain > best_gain:
                best_gain, best_edge, best_score = gain, (u, v), candidate
        if best_edge is None:
            break
        u, v = best_edge
        parents[v] = parents[v] | {u}
        children[u].add(v)
        family[v] = best_score
        total += best_gain
        trace.append(TraceStep("add", best_edge, total))

    while True:
        best_gain = 0.0
        best_edge = None
        best_score = 0.0
        for u, v in (
            (u, v) for u in names for v in names if u in parents[v]
        ):
            candidate = cache.family_score(v, parents[v] - {u})
            gain = candidate - family[v]
            if gain > best_gain:
                best_gain, best_edge, best_score = gain, (u, v), candidate
        if best_edge is None:
            break
        u, v = best_edge
        parents[v] = parents[v] - {u}
        children[u].discard(v)
        family[v] = best_score
        total += best_gain
        trace.append(TraceStep("delete", best_edge, total))

    edges = [(u, v) for v in names for u in sorted(parents[v])]
    graph = CausalGraph([Node(v, NodeKind.OBSERVED) for v in names], edges)
    return graph, tuple(trace)


def vstructures(graph: CausalGraph) -> frozenset[tuple[str, str, str]]:
    """Unshielded colliders (a, c, b) with a < b, a -> c <- b."""
    out = set()
    for c in graph.node_names():
        ps = graph.parents(c)
        for a, b in combinations(ps, 2):
            if not graph.has_edge(a, b) and not graph.has_edge(b, a):
                out.add((a, c, b))
    return frozenset(out)


def markov_equivalent(g1: CausalGraph, g2: CausalGraph) -> bool:
    """Same skeleton and same v-structures."""
    skel1 = {tuple(sorted(e)) for e in g1.edges}
    skel2 = {tuple(sorted(e)) for e in g2.edges}
    return skel1 == skel2 and vstructures(g1) == vstructures(g2)


def pattern_of_dag(graph: CausalGraph) -> Pattern:
    """The pattern a sound search should report for a DAG: its skeleton with
    v-structure edges directed and away-from-collider propagation applied."""
    skeleton = Pattern(
        graph.node_names(),
        frozenset({tuple(sorted(e)) for e in graph.edges}),
        frozenset(),
    )
    sepsets: SepSets = {}
    names = graph.node_names()
    for a, b in combinations(names, 2):
        if skeleton.adjacent(a, b):
            continue
        for size in range(len(names) - 1):
            found = None
            for cond in combinations(sorted(set(names) - {a, b}), size):
                if graph.is_d_separated({a}, {b}, set(cond)):
                    found = frozenset(cond)
                    break
            if found is not None:
                sepsets[frozenset((a, b))] = found
                break
    return orient(skeleton, sepsets)
