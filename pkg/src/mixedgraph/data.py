"""Mixed-type datasets: variable kinds, validation, CSV ingestion and output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DegenerateError, ParseError, ValidationError

DEFAULT_MAX_LEVELS = 20


@dataclass(frozen=True)
class Continuous:
    def to_fields(self):
        return ["continuous"]


@dataclass(frozen=True)
class Ordinal:
    """Ordered discrete variable with strictly increasing numeric level codes."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if len(levels) < 2:
            raise ValidationError("an ordinal variable needs at least 2 levels")
        if not all(math.isfinite(v) for v in levels):
            raise ValidationError("ordinal levels must be finite")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValidationError(f"ordinal levels must be strictly increasing: {levels}")
        object.__setattr__(self, "levels", levels)

    @property
    def n_levels(self):
        return len(self.levels)

    def to_fields(self):
        return ["ordinal"] + [_fmt(v) for v in self.levels]


VariableKind = Union[Continuous, Ordinal]


@dataclass(frozen=True, eq=False)
class MixedDataset:
    values: np.ndarray
    kinds: tuple
    names: tuple = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise ValidationError("dataset values must be a 2-d matrix")
        n, d = values.shape
        if n < 2 or d < 2:
            raise ValidationError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("dataset contains missing or non-finite entries")
        kinds = tuple(self.kinds)
        if len(kinds) != d:
            raise ValidationError(f"{len(kinds)} kinds given for {d} columns")
        names = tuple(self.names) if self.names is not None else tuple(f"X{j + 1}" for j in range(d))
        if len(names) != d:
            raise ValidationError(f"{len(names)} names given for {d} columns")
        if len(set(names)) != d:
            raise ValidationError("column names must be unique")
        for j, kind in enumerate(kinds):
            if isinstance(kind, Ordinal):
                bad = ~np.isin(values[:, j], kind.levels)
                if bad.any():
                    i = int(np.argmax(bad))
                    raise ValidationError(
                        f"column {names[j]!r}: value {values[i, j]!r} at row {i + 1} "
                        f"is not a declared level",
                        column=names[j],
                    )
            elif not isinstance(kind, Continuous):
                raise ValidationError(f"unknown variable kind {kind!r}")
            if np.ptp(values[:, j]) == 0.0:
                raise DegenerateError(f"column {names[j]!r} is constant", column=names[j])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def ordinal_indices(self):
        return [j for j, k in enumerate(self.kinds) if isinstance(k, Ordinal)]

    @property
    def continuous_indices(self):
        return [j for j, k in enumerate(self.kinds) if isinstance(k, Continuous)]

    @property
    def d1(self):
        return len(self.ordinal_indices)

    @property
    def d2(self):
        return len(self.continuous_indices)

    def column(self, j):
        return self.values[:, j]

    def __eq__(self, other):
        if not isinstance(other, MixedDataset):
            return NotImplemented
        return (
            self.kinds == other.kinds
            and self.names == other.names
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )


def infer_variable_kinds(values, max_levels=DEFAULT_MAX_LEVELS):
    """Assign a kind per column from the observed values.

    A column with at most ``max_levels`` distinct values, all integer-valued,
    becomes :class:`Ordinal` with its sorted distinct values as levels; any
    other column is :class:`Continuous`.

    Raises
    ------
    DegenerateError
        If a column takes a single value.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValidationError("values must be a 2-d matrix")
    if not np.all(np.isfinite(values)):
        raise ValidationError("values must be finite")
    kinds = []
    for j in range(values.shape[1]):
        uniq = np.unique(values[:, j])
        if uniq.size < 2:
            raise DegenerateError(f"column {j} is constant", column=j)
        if uniq.size <= max_levels and np.all(uniq == np.round(uniq)):
            kinds.append(Ordinal(tuple(uniq)))
        else:
            kinds.append(Continuous())
    return kinds


def _fmt(x):
    # shortest round-trip decimal
    return repr(float(x))


def _parse_kind(fields, where):
    tag = fields[0].strip().lower()
    if tag == "continuous":
        if len(fields) > 1:
            raise ValidationError(f"{where}: continuous kind takes no levels")
        return Continuous()
    if tag == "ordinal":
        try:
            levels = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise ValidationError(f"{where}: non-numeric ordinal level ({exc})") from None
        return Ordinal(tuple(levels))
    raise ValidationError(f"{where}: unknown kind {fields[0]!r}")


def read_kinds(path):
    """Read a kind sidecar file: one ``name,kind[,levels...]`` line per column."""
    kinds = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise ValidationError(f"{path}:{lineno}: expected name,kind[,levels...]")
            name = row[0].strip()
            if name in kinds:
                raise ValidationError(f"{path}:{lineno}: duplicate column {name!r}")
            kinds[name] = _parse_kind(row[1:], f"{path}:{lineno}")
    return kinds


def write_kinds(dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for name, kind in zip(dataset.names, dataset.kinds):
            writer.writerow([name] + kind.to_fields())


def ingest_csv(path, kind_spec=None, max_levels=DEFAULT_MAX_LEVELS):
    """Load a rectangular numeric CSV with a header row.

    Parameters
    ----------
    path : str or Path
    kind_spec : sequence of kinds, mapping name -> kind, or path to a sidecar
        Explicit kinds override inference. A mapping may cover a subset of
        columns; the rest are inferred.
    max_levels : int
        Inference cutoff passed to :func:`infer_variable_kinds`.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(names):
                raise ParseError(
                    f"{path}: row {i} has {len(row)} fields, expected {len(names)}", row=i
                )
            parsed = []
            for j, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric cell {cell!r} at row {i}, column {j + 1} ({names[j]})",
                        row=i, col=j + 1, column=names[j],
                    ) from None
                if not math.isfinite(v):
                    raise ParseError(
                        f"{path}: missing or non-finite cell at row {i}, column {j + 1} ({names[j]})",
                        row=i, col=j + 1, column=names[j],
                    )
                parsed.append(v)
            rows.append(parsed)
    values = np.array(rows, dtype=float).reshape(len(rows), len(names))

    if isinstance(kind_spec, (str, Path)):
        kind_spec = read_kinds(kind_spec)
    if kind_spec is None:
        kinds = infer_variable_kinds(values, max_levels) if values.shape[0] else []
    elif isinstance(kind_spec, Mapping):
        unknown = set(kind_spec) - set(names)
        if unknown:
            raise ValidationError(f"kinds given for unknown columns: {sorted(unknown)}")
        missing = [j for j, nm in enumerate(names) if nm not in kind_spec]
        inferred = dict(zip(missing, infer_variable_kinds(values[:, missing], max_levels))) if missing else {}
        kinds = [kind_spec[nm] if nm in kind_spec else inferred[j] for j, nm in enumerate(names)]
    elif isinstance(kind_spec, Sequence):
        kinds = list(kind_spec)
    else:
        raise ValidationError(f"unsupported kind_spec {type(kind_spec).__name__}")
    return MixedDataset(values, tuple(kinds), tuple(names))


def write_csv(dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.names)
        for row in dataset.values:
            writer.writerow([_fmt(v) for v in row])
