"""Tabular datasets with voluntarily disclosed (optional) features.

A dataset splits its columns into mandatory base features, optional features
that individual rows may withhold, and a binary label.  Withheld cells are
stored as NaN and tracked by a 0/1 availability mask; the mask is the single
source of truth for which optional values exist.

All operations are pure: datasets are frozen after construction (arrays are
made read-only) and every transformation returns a new instance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlreadyMissing,
    DegenerateLabels,
    EmptySplit,
    MissingColumn,
    NaInBaseFeature,
    NonNumericCell,
)
from .glm import sigmoid

__all__ = [
    "FeatureInjection",
    "InjectionSpec",
    "LabeledDataset",
    "Schema",
    "drop_optional",
    "feature_drop_scores",
    "impute_zero",
    "inject_availability",
    "load_csv",
    "rank_features_by_drop",
    "save_csv",
    "select_optional_count",
    "split_train_test",
]

DEFAULT_NA_TOKEN = "N/A"


@dataclass(frozen=True)
class Schema:
    """Column names: base features, optional features, and the label."""

    base_names: tuple[str, ...]
    optional_names: tuple[str, ...]
    label_name: str

    def __post_init__(self):
        object.__setattr__(self, "base_names", tuple(self.base_names))
        object.__setattr__(self, "optional_names", tuple(self.optional_names))
        names = [*self.base_names, *self.optional_names, self.label_name]
        if len(set(names)) != len(names):
            raise ValueError("schema names must be pairwise distinct")
        if len(self.base_names) == 0 and len(self.optional_names) == 0:
            raise ValueError("schema needs at least one feature column")

    @property
    def n_base(self) -> int:
        return len(self.base_names)

    @property
    def n_optional(self) -> int:
        return len(self.optional_names)

    def to_json(self) -> dict:
        return {
            "base": list(self.base_names),
            "optional": list(self.optional_names),
            "label": self.label_name,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Schema":
        return cls(tuple(obj["base"]), tuple(obj["optional"]), obj["label"])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Immutable labeled table with an availability mask over optional columns.

    ``optional_values`` holds NaN exactly where ``mask`` is 0; every stored
    value (base and available optional) is finite and labels are 0/1.
    """

    base: np.ndarray            # (N, n) float
    optional_values: np.ndarray  # (N, r) float, NaN where withheld
    mask: np.ndarray            # (N, r) bool
    labels: np.ndarray          # (N,) int in {0, 1}
    schema: Schema

    def __post_init__(self):
        base = _frozen(np.asarray(self.base, dtype=float))
        opt = _frozen(np.asarray(self.optional_values, dtype=float))
        mask = _frozen(np.asarray(self.mask, dtype=bool))
        labels = _frozen(np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "optional_values", opt)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "labels", labels)
        n_rows = base.shape[0]
        if not (opt.shape[0] == mask.shape[0] == labels.shape[0] == n_rows):
            raise ValueError("row counts differ between blocks")
        if base.shape[1] != self.schema.n_base or opt.shape[1] != self.schema.n_optional:
            raise ValueError("column counts do not match the schema")
        if mask.shape != opt.shape:
            raise ValueError("mask shape must match the optional block")
        if not np.all(np.isfinite(base)):
            raise ValueError("base features must be finite")
        if not np.all(np.isfinite(opt[mask])):
            raise ValueError("available optional values must be finite")
        if opt.size and not np.all(np.isnan(opt[~mask])):
            raise ValueError("withheld optional cells must hold the NaN sentinel")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0/1")

    @property
    def n_rows(self) -> int:
        return self.base.shape[0]

    @property
    def n_base(self) -> int:
        return self.base.shape[1]

    @property
    def n_optional(self) -> int:
        return self.optional_values.shape[1]

    def subset(self, indices) -> "LabeledDataset":
        """New dataset holding the given rows (in the given order)."""
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(
            base=self.base[idx],
            optional_values=self.optional_values[idx],
            mask=self.mask[idx],
            labels=self.labels[idx],
            schema=self.schema,
        )

    def equals(self, other: "LabeledDataset") -> bool:
        return (
            self.schema == other.schema
            and np.array_equal(self.base, other.base)
            and np.array_equal(self.optional_values, other.optional_values, equal_nan=True)
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class FeatureInjection:
    """Sigmoidal withholding rule for one optional feature.

    The probability of a value being withheld is sigmoid(slope*(z - center)).
    A positive slope makes above-center values more likely to disappear; a
    ``center`` of None means the empirical column mean.
    """

    name: str
    slope: float
    center: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.slope):
            raise ValueError("slope must be finite")
        if self.center is not None and not np.isfinite(self.center):
            raise ValueError("center must be finite")

    def to_json(self) -> dict:
        return {"name": self.name, "slope": self.slope, "center": self.center}

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureInjection":
        return cls(obj["name"], float(obj["slope"]),
                   None if obj.get("center") is None else float(obj["center"]))


@dataclass(frozen=True)
class InjectionSpec:
    """Collection of per-feature withholding rules, applied independently."""

    features: tuple[FeatureInjection, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature in injection spec")

    def to_json(self) -> list:
        return [f.to_json() for f in self.features]

    @classmethod
    def from_json(cls, obj: list) -> "InjectionSpec":
        return cls(tuple(FeatureInjection.from_json(o) for o in obj))


def _parse_cell(raw: str, row: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise NonNumericCell(row, column) from None


def _map_labels(raw: list[str], column: str) -> np.ndarray:
    distinct = sorted(set(raw))
    if len(distinct) != 2:
        raise DegenerateLabels(
            f"label column {column!r} has {len(distinct)} distinct values, need 2"
        )
    try:
        ordered = sorted(distinct, key=float)
    except ValueError:
        ordered = distinct  # lexicographic: e.g. No<Yes, Bad<Good, False<True
    to_int = {ordered[0]: 0, ordered[1]: 1}
    return np.array([to_int[v] for v in raw], dtype=np.int64)


def load_csv(path, schema: Schema, na_token: str = DEFAULT_NA_TOKEN) -> LabeledDataset:
    """Read a dataset from a headered CSV file.

    Optional cells equal to ``na_token`` become withheld entries; base cells
    must always be numeric.  The two distinct label values map to 0/1 by
    numeric order when both parse as numbers, lexicographic order otherwise
    (so "No"/"Yes" and "Bad"/"Good" land on 0/1 as expected).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        col_index: dict[str, int] = {}
        for name in (*schema.base_names, *schema.optional_names, schema.label_name):
            if name not in header:
                raise MissingColumn(name)
            col_index[name] = header.index(name)

        base_rows, opt_rows, mask_rows, label_raw = [], [], [], []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            brow = []
            for name in schema.base_names:
                raw = row[col_index[name]].strip()
                if raw == na_token:
                    raise NaInBaseFeature(row_no, name)
                brow.append(_parse_cell(raw, row_no, name))
            orow, mrow = [], []
            for name in schema.optional_names:
                raw = row[col_index[name]].strip()
                if raw == na_token:
                    orow.append(np.nan)
                    mrow.append(False)
                else:
                    orow.append(_parse_cell(raw, row_no, name))
                    mrow.append(True)
            base_rows.append(brow)
            opt_rows.append(orow)
            mask_rows.append(mrow)
            label_raw.append(row[col_index[schema.label_name]].strip())

    n_rows = len(base_rows)
    return LabeledDataset(
        base=np.asarray(base_rows, dtype=float).reshape(n_rows, schema.n_base),
        optional_values=np.asarray(opt_rows, dtype=float).reshape(n_rows, schema.n_optional),
        mask=np.asarray(mask_rows, dtype=bool).reshape(n_rows, schema.n_optional),
        labels=_map_labels(label_raw, schema.label_name),
        schema=schema,
    )


def save_csv(ds: LabeledDataset, path, na_token: str = DEFAULT_NA_TOKEN) -> None:
    """Write a dataset back to CSV; inverse of :func:`load_csv`.

    Floats are written with shortest round-trip repr, so loading the file
    again reproduces the arrays exactly.
    """
    schema = ds.schema
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([*schema.base_names, *schema.optional_names, schema.label_name])
        for j in range(ds.n_rows):
            row = [repr(float(v)) for v in ds.base[j]]
            for i in range(ds.n_optional):
                row.append(repr(float(ds.optional_values[j, i])) if ds.mask[j, i] else na_token)
            row.append(str(int(ds.labels[j])))
            writer.writerow(row)


def inject_availability(ds: LabeledDataset, spec: InjectionSpec, rng_seed: int) -> LabeledDataset:
    """Stochastically withhold optional values by the sigmoidal rule.

    Each targeted cell is withheld with probability sigmoid(slope*(z - center)),
    independently per row and feature; draws are deterministic given the seed.
    Only fully available columns may be targeted.
    """
    name_to_col = {n: i for i, n in enumerate(ds.schema.optional_names)}
    for f in spec.features:
        if f.name not in name_to_col:
            raise MissingColumn(f.name)
        if not np.all(ds.mask[:, name_to_col[f.name]]):
            raise AlreadyMissing(f.name)

    rng = np.random.default_rng(rng_seed)
    values = np.array(ds.optional_values)
    mask = np.array(ds.mask)
    for f in spec.features:
        col = name_to_col[f.name]
        z = values[:, col]
        center = float(np.mean(z)) if f.center is None else f.center
        p_missing = sigmoid(f.slope * (z - center))
        keep = rng.random(ds.n_rows) >= p_missing
        mask[:, col] = keep
        values[~keep, col] = np.nan
    return LabeledDataset(ds.base, values, mask, ds.labels, ds.schema)


def impute_zero(ds: LabeledDataset, add_indicator: bool) -> np.ndarray:
    """Design matrix with withheld optional cells filled by 0.

    With ``add_indicator`` the mask columns are appended as explicit 0/1
    features, giving a linear model direct access to the availability
    pattern.  Base columns are returned unchanged.
    """
    filled = np.where(ds.mask, ds.optional_values, 0.0)
    blocks = [ds.base, filled]
    if add_indicator:
        blocks.append(ds.mask.astype(float))
    return np.hstack(blocks)


def drop_optional(ds: LabeledDataset) -> np.ndarray:
    """Design matrix of the base features only."""
    return np.array(ds.base)


def select_optional_count(train_rows: int, min_samples: int) -> int:
    """Largest r such that train_rows / 2**r >= min_samples.

    With r optional features the subset models partition the training data
    into up to 2**r pieces; this caps r so the average piece keeps at least
    ``min_samples`` rows.
    """
    if not (train_rows >= min_samples >= 1):
        raise ValueError("need train_rows >= min_samples >= 1")
    r = 0
    while train_rows >= min_samples * 2 ** (r + 1):
        r += 1
    return r


def feature_drop_scores(ds: LabeledDataset, fit_fn, seed: int) -> dict[str, float]:
    """Held-out accuracy drop caused by removing each feature.

    ``fit_fn(X, y)`` must return a callable mapping a matrix to positive-class
    scores.  The score of a feature is (accuracy of the all-feature model) -
    (accuracy without the feature) on a fixed 20% holdout.
    """
    names = [*ds.schema.base_names, *ds.schema.optional_names]
    X = impute_zero(ds, add_indicator=False)
    y = ds.labels
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n_rows)
    n_test = int(np.floor(0.2 * ds.n_rows))
    test_idx, train_idx = np.sort(perm[:n_test]), np.sort(perm[n_test:])
    if n_test == 0 or train_idx.size == 0:
        raise EmptySplit()
    for part in (train_idx, test_idx):
        if len(np.unique(y[part])) < 2:
            raise DegenerateLabels("a holdout split contains a single class")

    def accuracy(cols) -> float:
        predict = fit_fn(X[np.ix_(train_idx, cols)], y[train_idx])
        scores = np.asarray(predict(X[np.ix_(test_idx, cols)]))
        return float(np.mean((scores >= 0.5) == y[test_idx]))

    all_cols = list(range(len(names)))
    full_acc = accuracy(all_cols)
    return {
        name: full_acc - accuracy([c for c in all_cols if c != k])
        for k, name in enumerate(names)
    }


def rank_features_by_drop(ds: LabeledDataset, fit_fn, seed: int) -> list[str]:
    """Feature names ordered by decreasing accuracy drop (ties by column)."""
    names = [*ds.schema.base_names, *ds.schema.optional_names]
    if len(names) == 1:
        return names
    scores = feature_drop_scores(ds, fit_fn, seed)
    order = {name: k for k, name in enumerate(names)}
    return sorted(names, key=lambda n: (-scores[n], order[n]))


def split_train_test(ds: LabeledDataset, fraction: float, seed: int):
    """Disjoint (train, test) split; test gets floor((1-fraction)*N) rows.

    Row order within each part follows the original dataset; the partition is
    a pure function of the seed.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must lie strictly in (0, 1)")
    n_test = int(np.floor((1.0 - fraction) * ds.n_rows))
    n_train = ds.n_rows - n_test
    if n_test == 0 or n_train == 0:
        raise EmptySplit()
    perm = np.random.default_rng(seed).permutation(ds.n_rows)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return ds.subset(train_idx), ds.subset(test_idx)
