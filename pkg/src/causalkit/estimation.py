"""Adjustment-based effect estimation from categorical data.

All estimators are complete-case: a record is used only when every column the
estimator touches is observed. `backdoor_adjust` computes the adjustment sum
Σ_z P(y|x,z)·P(z); `backdoor_adjust_ratio` computes the algebraically equal
joint-count route Σ_z P(x,y,z)/P(x|z) so the two can cross-check each other.
Both are full double precision; nothing is rounded internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .data import DiscreteDataset
from .errors import (
    EmptySelection,
    EmptyStratum,
    PositivityViolation,
    SchemaMismatch,
    UnknownState,
)

Sign = int  # +1, -1, or 0


def _check_value(ds: DiscreteDataset, column: str, value: str) -> None:
    if value not in ds.column_states(column):
        raise UnknownState(column, value)


def empirical_conditional(
    ds: DiscreteDataset, target: str, given: Mapping[str, str]
) -> dict[str, float]:
    """P(target | given) as a dict over the target column's declared states."""
    for col, val in given.items():
        _check_value(ds, col, val)
    cols = [target] + sorted(given)
    rows = ds.project(cols)
    want = tuple(given[c] for c in cols[1:])
    hits = [r[0] for r in rows if r[1:] == want]
    if not hits:
        raise EmptyStratum(dict(given))
    total = len(hits)
    return {
        s: sum(1 for v in hits if v == s) / total
        for s in ds.column_states(target)
    }


def _stratum_counts(
    ds: DiscreteDataset, x: str, y: str, z: Sequence[str]
):
    """Joint complete-case counts over (x, y, z...) plus stratum rollups."""
    zcols = list(z)
    rows = ds.project([x, y] + zcols)
    if not rows:
        raise EmptySelection(f"no complete rows over {[x, y] + zcols}")
    joint: dict[tuple, int] = {}
    per_stratum: dict[tuple, int] = {}
    per_stratum_x: dict[tuple, dict[str, int]] = {}
    for r in rows:
        xv, yv, zv = r[0], r[1], r[2:]
        joint[(xv, yv, zv)] = joint.get((xv, yv, zv), 0) + 1
        per_stratum[zv] = per_stratum.get(zv, 0) + 1
        per_stratum_x.setdefault(zv, {})
        per_stratum_x[zv][xv] = per_stratum_x[zv].get(xv, 0) + 1
    return joint, per_stratum, per_stratum_x, len(rows)


def backdoor_adjust(
    ds: DiscreteDataset,
    x: str,
    x_val: str,
    y: str,
    y_val: str,
    z: Sequence[str],
    laplace: bool = False,
) -> float:
    """Backdoor adjustment Σ_z P(y=y_val | x=x_val, z) · P(z).

    Every z-stratum present in the data must contain at least one record with
    x = x_val (positivity); otherwise PositivityViolation names the stratum.
    With `laplace` a +1 smoothing is applied to the stratum conditionals and
    stratum weights instead (exploratory use only).
    """
    _check_value(ds, x, x_val)
    _check_value(ds, y, y_val)
    zcols = list(z)
    joint, per_stratum, per_stratum_x, n = _stratum_counts(ds, x, y, zcols)

    if laplace:
        from itertools import product

        combos = sorted(product(*(ds.column_states(c) for c in zcols)))
        n_y = len(ds.column_states(y))
        total = 0.0
        for zv in combos:
            c_z = per_stratum.get(zv, 0)
            c_xz = per_stratum_x.get(zv, {}).get(x_val, 0)
            c_xyz = joint.get((x_val, y_val, zv), 0)
            p_y_given = (c_xyz + 1) / (c_xz + n_y)
            p_z = (c_z + 1) / (n + len(combos))
            total += p_y_given * p_z
        return total

    total = 0.0
    for zv in sorted(per_stratum):
        c_xz = per_stratum_x[zv].get(x_val, 0)
        if c_xz == 0:
            raise PositivityViolation(dict(zip(zcols, zv)) | {x: x_val})
        c_xyz = joint.get((x_val, y_val, zv), 0)
        total += (c_xyz / c_xz) * (per_stratum[zv] / n)
    return total


def backdoor_adjust_ratio(
    ds: DiscreteDataset,
    x: str,
    x_val: str,
    y: str,
    y_val: str,
    z: Sequence[str],
) -> float:
    """The same adjustment via joint frequencies, Σ_z P(x,y,z) / P(x|z).

    Algebraically identical to `backdoor_adjust`; kept as an independent
    computational route for cross-checking.
    """
    _check_value(ds, x, x_val)
    _check_value(ds, y, y_val)
    zcols = list(z)
    joint, per_stratum, per_stratum_x, n = _stratum_counts(ds, x, y, zcols)
    total = 0.0
    for zv in sorted(per_stratum):
        c_xz = per_stratum_x[zv].get(x_val, 0)
        if c_xz == 0:
            raise PositivityViolation(dict(zip(zcols, zv)) | {x: x_val})
        p_xyz = joint.get((x_val, y_val, zv), 0) / n
        p_x_given_z = (c_xz / n) / (per_stratum[zv] / n)
        total += p_xyz / p_x_given_z
    return total


def compute_ace(
    ds: DiscreteDataset,
    x: str,
    treat_val: str,
    control_val: str,
    y: str,
    y_val: str,
    z: Sequence[str],
) -> float:
    """Average causal effect P(y|do(x=treat)) - P(y|do(x=control)) via
    backdoor adjustment over z."""
    return backdoor_adjust(ds, x, treat_val, y, y_val, z) - backdoor_adjust(
        ds, x, control_val, y, y_val, z
    )


@dataclass(frozen=True)
class SimpsonReport:
    """Aggregate-vs-stratified comparison of a binary treatment.

    Rates are P(y = y_val | x = arm). Signs compare the first declared
    treatment state against the second (+1 when the first is higher).
    `reversal` is set when every stratum agrees on a nonzero sign and the
    aggregate sign differs; `mixed` when strata disagree among themselves.
    """

    x: str
    y: str
    y_val: str
    strata: tuple[str, ...]
    arms: tuple[str, str]
    aggregate_rates: dict[str, float]
    aggregate_sign: Sign
    stratum_rates: dict[tuple[str, ...], dict[str, float]]
    stratum_signs: dict[tuple[str, ...], Sign]
    reversal: bool
    mixed: bool


def _sign(delta: float) -> Sign:
    if delta > 0:
        return 1
    if delta < 0:
        return -1
    return 0


def detect_simpson_reversal(
    ds: DiscreteDataset, x: str, y: str, y_val: str, z: Sequence[str]
) -> SimpsonReport:
    """Check whether stratifying on z flips the direction of a binary
    treatment comparison.

    Every stratum present in the data must contain both treatment arms;
    a one-armed stratum raises EmptyStratum.
    """
    arms = ds.column_states(x)
    if len(arms) != 2:
        raise SchemaMismatch(
            f"treatment column {x!r} must be binary, has states {arms}"
        )
    _check_value(ds, y, y_val)
    a, b = arms
    zcols = list(z)
    joint, per_stratum, per_stratum_x, _ = _stratum_counts(ds, x, y, zcols)

    def rate(x_val: str, zv: tuple | None) -> float:
        if zv is None:
            hit = sum(
                c for (xv, yv, _), c in joint.items() if xv == x_val and yv == y_val
            )
            tot = sum(c for (xv, _, _), c in joint.items() if xv == x_val)
        else:
            hit = joint.get((x_val, y_val, zv), 0)
            tot = per_stratum_x[zv].get(x_val, 0)
        if tot == 0:
            raise EmptyStratum({x: x_val} | (dict(zip(zcols, zv)) if zv else {}))
        return hit / tot

    aggregate = {a: rate(a, None), b: rate(b, None)}
    agg_sign = _sign(aggregate[a] - aggregate[b])

    stratum_rates: dict[tuple[str, ...], dict[str, float]] = {}
    stratum_signs: dict[tuple[str, ...], Sign] = {}
    for zv in sorted(per_stratum):
        rates = {a: rate(a, zv), b: rate(b, zv)}
        stratum_rates[zv] = rates
        stratum_signs[zv] = _sign(rates[a] - rates[b])

    signs = set(stratum_signs.values())
    unanimous = len(signs) == 1 and 0 not in signs
    reversal = unanimous and agg_sign != next(iter(signs))
    mixed = not unanimous

    return SimpsonReport(
        x=x,
        y=y,
        y_val=y_val,
        strata=tuple(zcols),
        arms=(a, b),
        aggregate_rates=aggregate,
        aggregate_sign=agg_sign,
        stratum_rates=stratum_rates,
        stratum_signs=stratum_signs,
        reversal=reversal,
        mixed=mixed,
    )
