"""Command-line front end.

One subcommand per task: d-separation queries, backdoor checks, rule
applicability, SCM sampling and querying, adjustment estimates, selection
checks, de-biasing, transport, missing-data operations, bandit simulation,
structure discovery, and fixture export.

Conventions: `--out text` (default) prints probabilities with three
decimals, `--out json` prints full precision; randomized subcommands
require `--seed`; all referenced files are read and parsed before any
computation runs. Exit codes: 0 on success, 1 when the computation raises
a domain error, 2 for usage, file, or parse problems. The environment
variable CAUSALKIT_MAX_NODES overrides the path-enumeration node cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import fixtures
from .bandits import env_from_dict, make_policy, simulate
from .data import DiscreteDataset
from .discovery import greedy_score_search, pc
from .errors import CausalKitError
from .estimation import (
    backdoor_adjust,
    backdoor_adjust_ratio,
    compute_ace,
    detect_simpson_reversal,
)
from .graph import CausalGraph, graph_from_dict, set_max_nodes
from .missing import (
    NOT_RECOVERABLE,
    MGraph,
    apply_missingness,
    classify_mechanism,
    is_ci_testable,
    mgraph_from_dict,
    recover_joint,
)
from .scm import Cpt, DiscreteScm, scm_from_dict
from .transport import StratumEffects, detect_selection_bias, stratified_debias, transport_estimate


class _InputError(Exception):
    """A referenced file is missing, unreadable, or does not parse."""


def _read_text(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc


def _load_json(path: str) -> dict:
    text = _read_text(path)
    try:
        return json.loads(text)
    except ValueError as exc:
        raise _InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_graph(path: str) -> CausalGraph:
    payload = _load_json(path)
    try:
        return graph_from_dict(payload)
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid graph: {exc}") from exc


def _load_scm(path: str) -> DiscreteScm:
    payload = _load_json(path)
    try:
        return scm_from_dict(payload)
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid model: {exc}") from exc


def _load_mgraph(path: str) -> MGraph:
    payload = _load_json(path)
    try:
        return mgraph_from_dict(payload)
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid missingness graph: {exc}") from exc


def _load_dataset(path: str) -> DiscreteDataset:
    text = _read_text(path)
    try:
        return DiscreteDataset.from_csv(text)
    except (CausalKitError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid dataset: {exc}") from exc


def _load_effects(path: str) -> StratumEffects:
    payload = _load_json(path)
    try:
        return StratumEffects.from_dict(payload)
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid effects file: {exc}") from exc


def _load_env(path: str):
    payload = _load_json(path)
    try:
        return env_from_dict(payload)
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid bandit environment: {exc}") from exc


def _load_mask_cpts(path: str) -> dict[str, Cpt]:
    payload = _load_json(path)
    try:
        return {
            name: Cpt(
                name,
                tuple(spec["parents"]),
                tuple(spec["states"]),
                {tuple(key): tuple(dist) for key, dist in spec["rows"]},
            )
            for name, spec in payload.items()
        }
    except (CausalKitError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path} is not a valid indicator-table file: {exc}") from exc


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name or not value:
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE, got {text!r}"
        )
    return name, value


def _fmt(value: float) -> str:
    return f"{value:.3f}"


# -- handlers (each returns (json_payload, text_lines)) ------------------------


def _cmd_dsep(args):
    graph = _load_graph(args.graph)
    result = graph.is_d_separated(set(args.x), set(args.y), set(args.given))
    payload = {
        "x": sorted(args.x),
        "y": sorted(args.y),
        "given": sorted(args.given),
        "d_separated": result,
    }
    return payload, [f"d-separated: {str(result).lower()}"]


def _cmd_backdoor_check(args):
    graph = _load_graph(args.graph)
    result = graph.satisfies_backdoor_criterion(args.x, args.y, args.adjust)
    payload = {
        "x": args.x,
        "y": args.y,
        "adjust": sorted(args.adjust),
        "satisfies_backdoor_criterion": result,
    }
    return payload, [f"satisfies backdoor criterion: {str(result).lower()}"]


def _cmd_identify(args):
    graph = _load_graph(args.graph)
    rule3 = graph.rule3_applicable(args.x, args.y)
    rule1 = graph.rule1_applicable(args.y, args.x, args.w, args.given)
    payload = {
        "x": args.x,
        "y": args.y,
        "w": sorted(args.w),
        "given": sorted(args.given),
        "rule1_applicable": rule1,
        "rule3_applicable": rule3,
    }
    lines = [
        "rule 1 (drop observations w from P(y | do(x), z, w)): "
        + ("applicable" if rule1 else "not applicable"),
        "rule 3 (drop do(x) from P(y | do(x))): "
        + ("applicable" if rule3 else "not applicable"),
    ]
    return payload, lines


def _cmd_scm_sample(args):
    scm = _load_scm(args.model)
    ds = scm.sample(args.n, args.seed, include_latent=args.include_latent)
    csv_text = ds.to_csv()
    if args.save:
        with open(args.save, "w") as fh:
            fh.write(csv_text)
        payload = {"rows": len(ds), "columns": list(ds.columns), "saved": args.save}
        return payload, [f"wrote {len(ds)} rows to {args.save}"]
    payload = {
        "columns": list(ds.columns),
        "rows": [list(r) for r in ds.rows],
    }
    return payload, [csv_text.rstrip("\n")]


def _cmd_scm_query(args):
    scm = _load_scm(args.model)
    if args.do:
        scm = scm.intervene(dict(args.do))
    target = dict(args.target)
    if args.given:
        p = scm.query_conditional(target, dict(args.given))
    else:
        p = scm.probability(target)
    payload = {
        "target": {k: v for k, v in sorted(target.items())},
        "given": {k: v for k, v in sorted(args.given)},
        "do": {k: v for k, v in sorted(args.do)},
        "probability": p,
    }
    return payload, [_fmt(p)]


def _cmd_estimate_do(args):
    ds = _load_dataset(args.data)
    x, x_val = args.x
    y, y_val = args.y
    estimator = backdoor_adjust_ratio if args.ratio else backdoor_adjust
    kwargs = {} if args.ratio else {"laplace": args.smooth}
    estimate = estimator(ds, x, x_val, y, y_val, args.adjust, **kwargs)
    payload = {
        "x": {x: x_val},
        "y": {y: y_val},
        "adjust": sorted(args.adjust),
        "route": "ratio" if args.ratio else "sum",
        "estimate": estimate,
    }
    return payload, [_fmt(estimate)]


def _cmd_estimate_ace(args):
    ds = _load_dataset(args.data)
    y, y_val = args.y
    ace = compute_ace(ds, args.x, args.treat, args.control, y, y_val, args.adjust)
    payload = {
        "x": args.x,
        "treat": args.treat,
        "control": args.control,
        "y": {y: y_val},
        "adjust": sorted(args.adjust),
        "ace": ace,
    }
    return payload, [_fmt(ace)]


def _cmd_estimate_simpson(args):
    ds = _load_dataset(args.data)
    y, y_val = args.y
    report = detect_simpson_reversal(ds, args.x, y, y_val, args.strata)
    first, second = report.arms
    payload = {
        "x": report.x,
        "y": report.y,
        "y_val": report.y_val,
        "strata": list(report.strata),
        "arms": list(report.arms),
        "aggregate_rates": report.aggregate_rates,
        "aggregate_sign": report.aggregate_sign,
        "stratum_rates": {
            ",".join(k): v for k, v in sorted(report.stratum_rates.items())
        },
        "stratum_signs": {
            ",".join(k): v for k, v in sorted(report.stratum_signs.items())
        },
        "reversal": report.reversal,
        "mixed": report.mixed,
    }
    lines = [
        f"aggregate: {first}={_fmt(report.aggregate_rates[first])} "
        f"{second}={_fmt(report.aggregate_rates[second])}"
    ]
    for key in sorted(report.stratum_rates):
        rates = report.stratum_rates[key]
        lines.append(
            f"stratum {','.join(key)}: {first}={_fmt(rates[first])} "
            f"{second}={_fmt(rates[second])}"
        )
    lines.append(f"reversal: {str(report.reversal).lower()}")
    lines.append(f"mixed: {str(report.mixed).lower()}")
    return payload, lines


def _cmd_selection_check(args):
    graph = _load_graph(args.graph)
    report = detect_selection_bias(graph, args.x, args.y)
    payload = {
        "x": report.x,
        "y": report.y,
        "selection_nodes": list(report.selection_nodes),
        "paths": [
            {
                "path": str(a.path),
                "blocked_unconditioned": a.blocked_unconditioned,
                "blocked_under_selection": a.blocked_under_selection,
            }
            for a in report.paths
        ],
        "biased": report.biased,
    }
    lines = [f"selection nodes: {', '.join(report.selection_nodes) or '(none)'}"]
    for a in report.paths:
        lines.append(
            f"  {a.path} | unconditioned: "
            f"{'blocked' if a.blocked_unconditioned else 'open'} | "
            f"under selection: "
            f"{'blocked' if a.blocked_under_selection else 'open'}"
        )
    lines.append(f"selection bias: {str(report.biased).lower()}")
    return payload, lines


def _cmd_debias(args):
    ds = _load_dataset(args.data)
    x, x_val = args.x
    y, y_val = args.y
    estimate = stratified_debias(ds, x, x_val, y, y_val, args.strata)
    payload = {
        "x": {x: x_val},
        "y": {y: y_val},
        "strata": list(args.strata),
        "estimate": estimate,
    }
    return payload, [_fmt(estimate)]


def _cmd_transport(args):
    se = _load_effects(args.effects)
    estimate = transport_estimate(se)
    payload = {"stratum": se.stratum, "estimate": estimate}
    return payload, [_fmt(estimate)]


def _cmd_missing_classify(args):
    mg = _load_mgraph(args.graph)
    mechanism = classify_mechanism(mg)
    return {"mechanism": mechanism.value}, [f"mechanism: {mechanism.value}"]


def _cmd_missing_mask(args):
    ds = _load_dataset(args.data)
    mg = _load_mgraph(args.graph)
    cpts = _load_mask_cpts(args.rcpt)
    masked = apply_missingness(ds, mg, cpts, args.seed)
    csv_text = masked.to_csv()
    if args.save:
        with open(args.save, "w") as fh:
            fh.write(csv_text)
        payload = {
            "rows": len(masked),
            "columns": list(masked.columns),
            "saved": args.save,
        }
        return payload, [f"wrote {len(masked)} rows to {args.save}"]
    payload = {
        "columns": list(masked.columns),
        "rows": [[("" if v is None else v) for v in r] for r in masked.rows],
    }
    return payload, [csv_text.rstrip("\n")]


def _cmd_missing_recover(args):
    ds = _load_dataset(args.data)
    mg = _load_mgraph(args.graph)
    table = recover_joint(mg, ds, args.vars)
    if table is NOT_RECOVERABLE:
        return {"recoverable": False, "table": None}, ["NOT_RECOVERABLE"]
    payload = {"recoverable": True, "table": table.to_dict()}
    lines = []
    for states, p in sorted(table.entries.items()):
        cells = ",".join(f"{v}={s}" for v, s in zip(table.variables, states))
        lines.append(f"{cells}: {_fmt(p)}")
    return payload, lines


def _cmd_missing_testable(args):
    mg = _load_mgraph(args.graph)
    result = is_ci_testable(mg, args.x, args.y, args.given)
    payload = {
        "x": sorted(args.x),
        "y": sorted(args.y),
        "given": sorted(args.given),
        "testable": result.testable,
        "condition1": result.condition1,
        "condition2": result.condition2,
        "condition3": result.condition3,
    }
    lines = [
        f"testable: {str(result.testable).lower()}",
        f"  condition 1 (y has a member outside the needed indicators): "
        f"{str(result.condition1).lower()}",
        f"  condition 2 (x-side indicators inside the statement): "
        f"{str(result.condition2).lower()}",
        f"  condition 3 (y/z-side indicators inside y or z): "
        f"{str(result.condition3).lower()}",
    ]
    return payload, lines


def _cmd_bandit_sim(args):
    env = _load_env(args.env)
    policy = make_policy(args.policy, epsilon=args.epsilon)
    result = simulate(
        env, policy, args.horizon, args.seed, regret_benchmark=args.benchmark
    )
    arms = env.arms
    tail_freq = {a: result.arm_frequency(a, tail=0.1) for a in range(arms)}
    payload = {
        "policy": result.policy,
        "horizon": args.horizon,
        "benchmark": args.benchmark,
        "final_regret": result.final_regret(),
        "tail_arm_frequency": {str(a): f for a, f in tail_freq.items()},
    }
    lines = [
        f"policy: {result.policy}",
        f"final cumulative regret: {_fmt(result.final_regret())}",
        "tail arm frequency (last 10%): "
        + ", ".join(f"{a}: {_fmt(f)}" for a, f in tail_freq.items()),
    ]
    if args.save:
        with open(args.save, "w") as fh:
            fh.write(result.to_csv())
        payload["saved"] = args.save
        lines.append(f"wrote per-round log to {args.save}")
    return payload, lines


def _cmd_discover_pc(args):
    ds = _load_dataset(args.data)
    pattern = pc(
        ds,
        alpha=args.alpha,
        max_cond_size=args.max_cond,
        min_expected=args.min_expected,
    )
    payload = {"pattern": pattern.to_dict()}
    directed = ", ".join(f"{a}->{b}" for a, b in sorted(pattern.directed))
    undirected = ", ".join(f"{a}-{b}" for a, b in sorted(pattern.undirected))
    conflicts = ", ".join(f"{a}-{b}" for a, b in pattern.conflicts)
    lines = [
        f"directed: {directed or '(none)'}",
        f"undirected: {undirected or '(none)'}",
        f"conflicts: {conflicts or '(none)'}",
    ]
    return payload, lines


def _cmd_discover_ges(args):
    ds = _load_dataset(args.data)
    graph, trace = greedy_score_search(ds)
    payload = {
        "graph": {
            "nodes": [
                {"name": n.name, "kind": n.kind.value} for n in graph.nodes
            ],
            "edges": [[a, b] for a, b in sorted(graph.edges)],
        },
        "score": trace[-1].score,
        "trace": [
            {
                "op": step.op,
                "edge": list(step.edge) if step.edge else None,
                "score": step.score,
            }
            for step in trace
        ],
    }
    edges = ", ".join(f"{a}->{b}" for a, b in sorted(graph.edges))
    lines = [
        f"edges: {edges or '(none)'}",
        f"score: {_fmt(trace[-1].score)}",
        f"moves: {len(trace) - 1}",
    ]
    return payload, lines


def _cmd_fixtures(args):
    written = fixtures.write_all(args.dest)
    payload = {"written": [str(p) for p in written]}
    return payload, [f"wrote {p}" for p in written]


# -- parser ---------------------------------------------------------------------


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--out",
        choices=("text", "json"),
        default="text",
        help="output format (text rounds to 3 decimals; json is full precision)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalkit",
        description="Discrete causal inference from graphs, models, and tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="test d-separation in a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", nargs="+", required=True)
    p.add_argument("--y", nargs="+", required=True)
    p.add_argument("--given", nargs="*", default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_dsep)

    p = sub.add_parser("backdoor-check", help="test the backdoor criterion")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--adjust", nargs="*", default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_backdoor_check)

    p = sub.add_parser("identify", help="report do-calculus rule applicability")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", required=True, help="intervened node")
    p.add_argument("--y", required=True, help="outcome node")
    p.add_argument("--w", nargs="*", default=[], help="observations to drop")
    p.add_argument("--given", nargs="*", default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_identify)

    scm_p = sub.add_parser("scm", help="sample from or query a model")
    scm_sub = scm_p.add_subparsers(dest="subcommand", required=True)

    p = scm_sub.add_parser("sample", help="draw records by ancestral sampling")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--save", help="write CSV here instead of stdout")
    p.add_argument("--include-latent", action="store_true")
    _add_out(p)
    p.set_defaults(handler=_cmd_scm_sample)

    p = scm_sub.add_parser("query", help="exact probability by enumeration")
    p.add_argument("--model", required=True)
    p.add_argument("--target", nargs="+", type=_assignment, required=True)
    p.add_argument("--given", nargs="*", type=_assignment, default=[])
    p.add_argument("--do", nargs="*", type=_assignment, default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_scm_query)

    est_p = sub.add_parser("estimate", help="adjustment-based estimation")
    est_sub = est_p.add_subparsers(dest="subcommand", required=True)

    p = est_sub.add_parser("do", help="interventional probability via adjustment")
    p.add_argument("--data", required=True)
    p.add_argument("--x", type=_assignment, required=True, metavar="X=VAL")
    p.add_argument("--y", type=_assignment, required=True, metavar="Y=VAL")
    p.add_argument("--adjust", nargs="*", default=[])
    p.add_argument("--smooth", action="store_true", help="Laplace (+1) smoothing")
    p.add_argument("--ratio", action="store_true", help="use the joint-ratio route")
    _add_out(p)
    p.set_defaults(handler=_cmd_estimate_do)

    p = est_sub.add_parser("ace", help="average causal effect between two arms")
    p.add_argument("--data", required=True)
    p.add_argument("--x", required=True, help="treatment column")
    p.add_argument("--treat", required=True)
    p.add_argument("--control", required=True)
    p.add_argument("--y", type=_assignment, required=True, metavar="Y=VAL")
    p.add_argument("--adjust", nargs="*", default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_estimate_ace)

    p = est_sub.add_parser("simpson", help="aggregate-vs-stratified reversal check")
    p.add_argument("--data", required=True)
    p.add_argument("--x", required=True, help="binary treatment column")
    p.add_argument("--y", type=_assignment, required=True, metavar="Y=VAL")
    p.add_argument("--strata", nargs="+", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_estimate_simpson)

    p = sub.add_parser("selection-check", help="find selection-opened backdoor paths")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_selection_check)

    p = sub.add_parser("debias", help="stratified estimate from a selection-masked table")
    p.add_argument("--data", required=True)
    p.add_argument("--x", type=_assignment, required=True, metavar="X=VAL")
    p.add_argument("--y", type=_assignment, required=True, metavar="Y=VAL")
    p.add_argument("--strata", nargs="+", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_debias)

    p = sub.add_parser("transport", help="re-weight stratum effects to a new population")
    p.add_argument("--effects", required=True, help="StratumEffects JSON file")
    _add_out(p)
    p.set_defaults(handler=_cmd_transport)

    mis_p = sub.add_parser("missing", help="missingness-graph operations")
    mis_sub = mis_p.add_subparsers(dest="subcommand", required=True)

    p = mis_sub.add_parser("classify", help="MCAR / MAR / MNAR from the graph")
    p.add_argument("--graph", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_missing_classify)

    p = mis_sub.add_parser("mask", help="sample indicators and blank cells")
    p.add_argument("--data", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--rcpt", required=True, help="indicator tables JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--save", help="write CSV here instead of stdout")
    _add_out(p)
    p.set_defaults(handler=_cmd_missing_mask)

    p = mis_sub.add_parser("recover", help="estimate a joint from masked data")
    p.add_argument("--data", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--vars", nargs="+", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_missing_recover)

    p = mis_sub.add_parser("testable", help="syntactic CI-testability check")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", nargs="+", required=True)
    p.add_argument("--y", nargs="+", required=True)
    p.add_argument("--given", nargs="*", default=[])
    _add_out(p)
    p.set_defaults(handler=_cmd_missing_testable)

    ban_p = sub.add_parser("bandit", help="bandit simulation")
    ban_sub = ban_p.add_subparsers(dest="subcommand", required=True)

    p = ban_sub.add_parser("sim", help="run one policy on one environment")
    p.add_argument("--env", required=True)
    p.add_argument(
        "--policy",
        required=True,
        choices=("greedy", "epsilon", "thompson", "causal_thompson", "uniform", "oracle"),
    )
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--benchmark", choices=("conditional", "marginal"), default="conditional")
    p.add_argument("--save", help="write the per-round CSV log here")
    _add_out(p)
    p.set_defaults(handler=_cmd_bandit_sim)

    dis_p = sub.add_parser("discover", help="structure learning from data")
    dis_sub = dis_p.add_subparsers(dest="subcommand", required=True)

    p = dis_sub.add_parser("pc", help="constraint-based pattern search")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--max-cond", type=int, default=3)
    p.add_argument("--min-expected", type=float, default=5.0)
    _add_out(p)
    p.set_defaults(handler=_cmd_discover_pc)

    p = dis_sub.add_parser("ges", help="greedy BIC hill-climb")
    p.add_argument("--data", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_discover_ges)

    p = sub.add_parser("fixtures", help="write all built-in example files")
    p.add_argument("--dest", required=True)
    _add_out(p)
    p.set_defaults(handler=_cmd_fixtures)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    cap = os.environ.get("CAUSALKIT_MAX_NODES")
    if cap is not None:
        try:
            set_max_nodes(int(cap))
        except ValueError as exc:
            print(f"error: bad CAUSALKIT_MAX_NODES: {exc}", file=sys.stderr)
            return 2

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, lines = args.handler(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CausalKitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    if args.out == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
