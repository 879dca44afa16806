"""Categorical datasets and discrete probability tables.

Cells hold string state labels; a missing cell is None (MISSING). CSV files
carry a header row, and empty or "NA" cells read back as missing. Column state
spaces are either declared explicitly (e.g. by the sampler, so states unseen
in a finite sample stay known) or inferred as the sorted distinct observed
labels.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EmptySelection, SchemaMismatch

MISSING = None

Row = tuple[Optional[str], ...]


class DiscreteDataset:
    """A fixed-schema table of categorical records.

    columns: ordered column names.
    states: per-column tuple of admissible state labels.
    rows: list of per-record tuples aligned with `columns`; None means missing.
    """

    def __init__(
        self,
        columns: Sequence[str],
        rows: Iterable[Row],
        states: Mapping[str, Sequence[str]] | None = None,
    ):
        self.columns: tuple[str, ...] = tuple(columns)
        if len(set(self.columns)) != len(self.columns):
            raise SchemaMismatch("duplicate column names")
        self.rows: list[Row] = [tuple(r) for r in rows]
        for r in self.rows:
            if len(r) != len(self.columns):
                raise SchemaMismatch(
                    f"row of width {len(r)} in a {len(self.columns)}-column dataset"
                )

        if states is None:
            inferred: dict[str, set[str]] = {c: set() for c in self.columns}
            for r in self.rows:
                for c, v in zip(self.columns, r):
                    if v is not None:
                        inferred[c].add(v)
            self.states: dict[str, tuple[str, ...]] = {
                c: tuple(sorted(vals)) for c, vals in inferred.items()
            }
        else:
            missing_cols = set(self.columns) - set(states)
            if missing_cols:
                raise SchemaMismatch(
                    f"no state list for columns: {sorted(missing_cols)}"
                )
            self.states = {c: tuple(states[c]) for c in self.columns}
            for r in self.rows:
                for c, v in zip(self.columns, r):
                    if v is not None and v not in self.states[c]:
                        raise SchemaMismatch(
                            f"value {v!r} outside declared states of column {c!r}"
                        )

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDataset):
            return NotImplemented
        return (
            self.columns == other.columns
            and self.states == other.states
            and self.rows == other.rows
        )

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise SchemaMismatch(f"no column named {name!r}") from None

    def column_states(self, name: str) -> tuple[str, ...]:
        return self.states[self.columns[self.column_index(name)]]

    def project(
        self, names: Sequence[str], complete_only: bool = True
    ) -> list[Row]:
        """Rows restricted to `names`; with complete_only, rows missing any
        of those cells are dropped."""
        idx = [self.column_index(n) for n in names]
        out = []
        for r in self.rows:
            vals = tuple(r[i] for i in idx)
            if complete_only and any(v is None for v in vals):
                continue
            out.append(vals)
        return out

    def counts(self, names: Sequence[str]) -> Counter:
        """Complete-case joint counts over the named columns."""
        return Counter(self.project(names))

    def with_columns(
        self, new_columns: Mapping[str, Sequence[Optional[str]]],
        new_states: Mapping[str, Sequence[str]],
    ) -> "DiscreteDataset":
        """Copy with extra columns appended."""
        for name, col in new_columns.items():
            if len(col) != len(self.rows):
                raise SchemaMismatch(f"column {name!r} has wrong length")
        names = list(new_columns)
        rows = [
            r + tuple(new_columns[n][i] for n in names)
            for i, r in enumerate(self.rows)
        ]
        states = dict(self.states)
        states.update({n: tuple(new_states[n]) for n in names})
        return DiscreteDataset(self.columns + tuple(names), rows, states)

    # -- CSV ----------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow(["NA" if v is None else v for v in r])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(
        cls, text: str, states: Mapping[str, Sequence[str]] | None = None
    ) -> "DiscreteDataset":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty CSV: no header row") from None
        rows = []
        for raw in reader:
            if not raw:
                continue
            if len(raw) != len(header):
                raise SchemaMismatch(
                    f"row of width {len(raw)} under a {len(header)}-column header"
                )
            rows.append(
                tuple(None if v in ("", "NA") else v for v in raw)
            )
        return cls(header, rows, states)

    @classmethod
    def load_csv(
        cls, path, states: Mapping[str, Sequence[str]] | None = None
    ) -> "DiscreteDataset":
        with open(path, newline="") as fh:
            return cls.from_csv(fh.read(), states)


@dataclass
class ProbTable:
    """A joint probability table over named discrete variables.

    entries maps full state tuples (aligned with `variables`) to
    probabilities. Entries must be nonnegative and sum to 1 within 1e-9;
    omitted cells are zero.
    """

    variables: tuple[str, ...]
    entries: dict[tuple[str, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.entries = {tuple(k): float(v) for k, v in self.entries.items()}
        for key, p in self.entries.items():
            if len(key) != len(self.variables):
                raise SchemaMismatch(f"entry {key} has wrong arity")
            if p < -1e-12:
                raise SchemaMismatch(f"negative probability at {key}")
        total = sum(self.entries.values())
        if abs(total - 1.0) > 1e-9:
            raise SchemaMismatch(f"probabilities sum to {total}, not 1")

    def prob(self, key: Sequence[str]) -> float:
        return self.entries.get(tuple(key), 0.0)

    def marginal(self, names: Sequence[str]) -> "ProbTable":
        idx = [self.variables.index(n) for n in names]
        out: dict[tuple[str, ...], float] = {}
        for key, p in self.entries.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, 0.0) + p
        return ProbTable(tuple(names), out)

    def l1_distance(self, other: "ProbTable") -> float:
        if self.variables != other.variables:
            raise SchemaMismatch("tables are over different variables")
        keys = set(self.entries) | set(other.entries)
        return sum(abs(self.prob(k) - other.prob(k)) for k in keys)

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "entries": [
                [list(key), p] for key, p in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ProbTable":
        return cls(
            tuple(payload["variables"]),
            {tuple(key): p for key, p in payload["entries"]},
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProbTable":
        return cls.from_dict(json.loads(text))


def empirical_joint(ds: DiscreteDataset, names: Sequence[str]) -> ProbTable:
    """Complete-case relative frequencies over the named columns."""
    counts = ds.counts(names)
    total = sum(counts.values())
    if total == 0:
        raise EmptySelection(f"no complete rows over {list(names)}")
    return ProbTable(
        tuple(names), {k: c / total for k, c in counts.items()}
    )
