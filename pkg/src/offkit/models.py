"""Estimators for classification with voluntarily withheld features.

The key object is the availability subset: the set I of optional features a
row disclosed.  A fair predictor conditions on exactly the disclosed values
and on the event "these features are present", marginalizing over whether
anything else was disclosed.  This module provides

* ``MultiModel``  -- one submodel per subset I, dispatched at prediction time;
* ``OffLrModel``  -- a logistic model whose per-feature additive terms
  reconstruct all 2**r subset models from r+1 fits;
* ``NbOffModel``  -- the analogous Naive Bayes estimator for binary features;
* ``CspModel``    -- the conditional-statistical-parity baseline that scores
  non-disclosers by the disclosing population's conditional mean;
* ``BaseModel`` / ``ImputedModel`` -- the base-features-only and zero-imputed
  (unfair) reference models;
* ``brute_force_off`` -- the exact subset-conditional mean on an enumerated
  finite distribution, used as ground truth by the test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .dataset import LabeledDataset, Schema, drop_optional, impute_zero
from .errors import (
    DegenerateLabels,
    DimensionMismatch,
    InsufficientSubset,
    NonBinaryFeature,
    UnknownSubset,
    ZeroMassEvent,
)
from .glm import FitConfig, LogisticParams, fit_logistic, predict_proba, sigmoid

__all__ = [
    "BaseModel",
    "CspModel",
    "FiniteDistribution",
    "GroupMeanSubmodel",
    "ImputedModel",
    "LogisticSubmodel",
    "MultiModel",
    "NbOffModel",
    "OffLrModel",
    "all_subset_keys",
    "brute_force_off",
    "fit_base",
    "fit_csp",
    "fit_imputed",
    "fit_multi",
    "fit_nb_off",
    "fit_off_lr",
    "group_mean_fitter",
    "key_from_bitstring",
    "key_to_bitstring",
    "logistic_fitter",
    "model_from_json",
    "model_to_json",
    "off_lr_from_subset_fits",
    "predict_csp",
    "predict_multi",
    "predict_nb_off",
    "predict_off_lr",
]


# ---------------------------------------------------------------------------
# Availability subsets


def key_from_availability(a) -> tuple[int, ...]:
    """Canonical subset key (sorted feature indices) for a 0/1 pattern."""
    return tuple(int(i) for i in np.flatnonzero(np.asarray(a, dtype=bool)))


def all_subset_keys(r: int) -> list[tuple[int, ...]]:
    """All 2**r subset keys, ordered by size then lexicographically."""
    keys: list[tuple[int, ...]] = []
    for size in range(r + 1):
        keys.extend(combinations(range(r), size))
    return keys


def key_to_bitstring(key: tuple[int, ...], r: int) -> str:
    """Bitstring with character i set iff optional feature i is in the key."""
    bits = ["0"] * r
    for i in key:
        bits[i] = "1"
    return "".join(bits)


def key_from_bitstring(s: str) -> tuple[int, ...]:
    return tuple(i for i, c in enumerate(s) if c == "1")


# ---------------------------------------------------------------------------
# Submodels (the pluggable per-subset predictors)


@dataclass(frozen=True)
class LogisticSubmodel:
    params: LogisticParams

    def predict_matrix(self, X) -> np.ndarray:
        return predict_proba(self.params, X)


class GroupMeanSubmodel:
    """Memorized conditional mean of the label per exact feature tuple.

    Intended for finite tables where every query row occurred in training;
    unseen rows fall back to the (weighted) global mean.
    """

    def __init__(self, table: dict[tuple, float], default: float):
        self.table = table
        self.default = default

    def predict_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array(
            [self.table.get(tuple(row), self.default) for row in X], dtype=float
        )


def logistic_fitter(cfg: FitConfig = FitConfig()):
    """Submodel fit contract backed by :func:`offkit.glm.fit_logistic`."""

    def fit(X, y, sample_weight=None) -> LogisticSubmodel:
        return LogisticSubmodel(fit_logistic(X, y, cfg, sample_weight=sample_weight))

    return fit


def group_mean_fitter():
    """Submodel fit contract computing exact weighted group means."""

    def fit(X, y, sample_weight=None) -> GroupMeanSubmodel:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape[0] == 0:
            raise DegenerateLabels("cannot average an empty subset")
        w = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, float)
        mass: dict[tuple, float] = {}
        hits: dict[tuple, float] = {}
        for row, label, weight in zip(X, y, w):
            k = tuple(row)
            mass[k] = mass.get(k, 0.0) + weight
            hits[k] = hits.get(k, 0.0) + weight * label
        table = {k: hits[k] / mass[k] for k in mass}
        default = float(np.sum(w * y) / np.sum(w))
        return GroupMeanSubmodel(table, default)

    return fit


# ---------------------------------------------------------------------------
# Multi model: one submodel per availability subset


@dataclass(frozen=True, eq=False)
class MultiModel:
    submodels: dict
    schema: Schema
    fallbacks: dict = field(default_factory=dict)
    n_fits: int = field(default=0, compare=False)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        """Rowwise prediction, each row dispatched on its own subset."""
        if ds.schema.n_optional != self.schema.n_optional:
            raise DimensionMismatch(self.schema.n_optional, ds.schema.n_optional)
        out = np.empty(ds.n_rows)
        patterns = {}
        for j in range(ds.n_rows):
            patterns.setdefault(tuple(ds.mask[j]), []).append(j)
        for pattern, rows in patterns.items():
            key = key_from_availability(pattern)
            if key not in self.submodels:
                raise UnknownSubset(key)
            idx = np.asarray(rows)
            X = np.hstack([ds.base[idx], ds.optional_values[np.ix_(idx, list(key))]])
            out[idx] = self.submodels[key].predict_matrix(X)
        return out


def _subset_rows(ds: LabeledDataset, key: tuple[int, ...]) -> np.ndarray:
    if not key:
        return np.arange(ds.n_rows)
    return np.flatnonzero(ds.mask[:, list(key)].all(axis=1))


def fit_multi(
    ds: LabeledDataset,
    cfg: FitConfig = FitConfig(),
    fitter=None,
    sample_weight=None,
) -> MultiModel:
    """Fit one submodel per availability subset I (2**r fits).

    The submodel for I trains on every row that disclosed at least the
    features in I, using the design matrix [base | z_I].  A subset whose fit
    is degenerate borrows the model of its largest fittable proper subset
    (preferring candidates that keep low feature indices); the borrowed keys
    are recorded in ``fallbacks``.
    """
    if fitter is None:
        fitter = logistic_fitter(cfg)
    weights = None if sample_weight is None else np.asarray(sample_weight, dtype=float)
    submodels: dict = {}
    fitted_ok: set = set()
    fallbacks: dict = {}
    n_fits = 0
    for key in all_subset_keys(ds.n_optional):
        rows = _subset_rows(ds, key)
        X = np.hstack([ds.base[rows], ds.optional_values[np.ix_(rows, list(key))]])
        try:
            submodel = fitter(X, ds.labels[rows],
                              None if weights is None else weights[rows])
        except DegenerateLabels:
            donor = _largest_fittable_subset(key, fitted_ok)
            if donor is None:
                raise InsufficientSubset(key, int(rows.size)) from None
            submodels[key] = submodels[donor]
            fallbacks[key] = donor
            continue
        submodels[key] = submodel
        fitted_ok.add(key)
        n_fits += 1
    return MultiModel(submodels=submodels, schema=ds.schema,
                      fallbacks=fallbacks, n_fits=n_fits)


def _largest_fittable_subset(key, fitted_ok):
    for size in range(len(key) - 1, -1, -1):
        for candidate in combinations(key, size):
            if candidate in fitted_ok:
                return candidate
    return None


def predict_multi(m: MultiModel, b, a, z) -> float:
    """Prediction for one row; the availability pattern only selects the
    submodel and never enters as a feature value."""
    b = np.asarray(b, dtype=float)
    a = np.asarray(a)
    z = np.asarray(z, dtype=float)
    n = m.schema.n_base
    r = m.schema.n_optional
    if b.shape != (n,):
        raise DimensionMismatch(n, b.size)
    if a.shape != (r,) or z.shape != (r,):
        raise DimensionMismatch(r, a.size)
    key = key_from_availability(a)
    if key not in m.submodels:
        raise UnknownSubset(key)
    x = np.concatenate([b, z[list(key)]])
    return float(m.submodels[key].predict_matrix(x[None, :])[0])


# ---------------------------------------------------------------------------
# OFF-LR: shared additive terms covering all subsets with r+1 fits


@dataclass(frozen=True, eq=False)
class OffLrModel:
    """Logistic model with one additive term block per optional feature.

    The log-odds of a row that disclosed the subset I are
    ``w.b + t + sum_{i in I} (omega_i.b + beta_i z_i + s_i)``, so a single
    parameter set of n + 1 + r(n+2) scalars serves every subset.
    """

    w: np.ndarray        # (n,)
    t: float
    omega: np.ndarray    # (r, n)
    beta: np.ndarray     # (r,)
    s: np.ndarray        # (r,)
    schema: Schema
    n_fits: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("w", "omega", "beta", "s"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_parameters(self) -> int:
        """Total stored scalars: n + 1 + r(n + 2)."""
        return int(self.w.size + 1 + self.omega.size + self.beta.size + self.s.size)

    def log_odds_matrix(self, ds: LabeledDataset) -> np.ndarray:
        if ds.schema.n_base != self.w.shape[0]:
            raise DimensionMismatch(self.w.shape[0], ds.schema.n_base)
        z = np.where(ds.mask, ds.optional_values, 0.0)
        terms = ds.base @ self.omega.T + self.beta * z + self.s
        return ds.base @ self.w + self.t + (ds.mask * terms).sum(axis=1)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        return sigmoid(self.log_odds_matrix(ds))


def off_lr_from_subset_fits(
    base_fit: LogisticParams, single_fits: list[LogisticParams], schema: Schema
) -> OffLrModel:
    """Recombine the base fit and the r single-feature fits.

    The term block of feature k is the excess of the single-feature model
    over the base model: omega_k = w_k - w, beta_k = the z coefficient, and
    s_k = t_k - t.
    """
    n = base_fit.n_features
    omega = np.array([f.weights[:n] - base_fit.weights for f in single_fits])
    beta = np.array([f.weights[n] for f in single_fits])
    s = np.array([f.intercept - base_fit.intercept for f in single_fits])
    r = len(single_fits)
    return OffLrModel(
        w=base_fit.weights, t=base_fit.intercept,
        omega=omega.reshape(r, n), beta=beta, s=s,
        schema=schema, n_fits=r + 1,
    )


def fit_off_lr(ds: LabeledDataset, cfg: FitConfig = FitConfig()) -> OffLrModel:
    """Fit the shared-term logistic model with exactly r+1 primitive fits.

    Step 1 fits the base-features model; step 2 fits, for each optional
    feature k, a model on [base | z_k] restricted to rows that disclosed k.
    There is no fallback here: a single-feature subset that cannot be fitted
    is a hard error because those fits are the method's backbone.
    """
    base_fit = fit_logistic(drop_optional(ds), ds.labels, cfg)
    single_fits = []
    for k in range(ds.n_optional):
        rows = np.flatnonzero(ds.mask[:, k])
        X = np.hstack([ds.base[rows], ds.optional_values[rows, k:k + 1]])
        try:
            single_fits.append(fit_logistic(X, ds.labels[rows], cfg))
        except DegenerateLabels:
            raise InsufficientSubset((k,), int(rows.size)) from None
    return off_lr_from_subset_fits(base_fit, single_fits, ds.schema)


def predict_off_lr(m: OffLrModel, b, a, z) -> float:
    """Pointwise prediction; entries of z outside the disclosed set are
    never read."""
    b = np.asarray(b, dtype=float)
    a = np.asarray(a)
    z = np.asarray(z, dtype=float)
    n, r = m.w.shape[0], m.beta.shape[0]
    if b.shape != (n,):
        raise DimensionMismatch(n, b.size)
    if a.shape != (r,) or z.shape != (r,):
        raise DimensionMismatch(r, a.size)
    exponent = float(m.w @ b + m.t)
    for i in key_from_availability(a):
        exponent += float(m.omega[i] @ b + m.beta[i] * z[i] + m.s[i])
    return float(sigmoid(exponent))


# ---------------------------------------------------------------------------
# Naive Bayes with withholding-aware optional factors


@dataclass(frozen=True, eq=False)
class NbOffModel:
    """Log-ratio tables of a Naive Bayes model over binary features.

    Optional features contribute the joint factor "value v disclosed", so a
    withheld feature simply contributes no factor.  Stores 2n + 2r ratio
    entries plus one prior.
    """

    prior_log_odds: float
    base_log_ratios: np.ndarray      # (n, 2), [i, v]
    optional_log_ratios: np.ndarray  # (r, 2), [i, v]
    schema: Schema

    def __post_init__(self):
        for name in ("base_log_ratios", "optional_log_ratios"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "prior_log_odds", float(self.prior_log_odds))

    @property
    def n_ratio_parameters(self) -> int:
        return int(self.base_log_ratios.size + self.optional_log_ratios.size)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        n, r = self.base_log_ratios.shape[0], self.optional_log_ratios.shape[0]
        if ds.schema.n_base != n or ds.schema.n_optional != r:
            raise DimensionMismatch(n + r, ds.schema.n_base + ds.schema.n_optional)
        B = _as_binary(ds.base, ds.schema.base_names)
        score = np.full(ds.n_rows, self.prior_log_odds)
        if n:
            score = score + self.base_log_ratios[np.arange(n), B].sum(axis=1)
        if r:
            zf = np.where(ds.mask, ds.optional_values, 0.0)
            Z = _as_binary(zf, ds.schema.optional_names)
            contrib = self.optional_log_ratios[np.arange(r), Z]
            score = score + (ds.mask * contrib).sum(axis=1)
        return sigmoid(score)


def _as_binary(values: np.ndarray, names) -> np.ndarray:
    out = values.astype(np.int64)
    bad = np.flatnonzero(((values != 0) & (values != 1)).any(axis=0))
    if bad.size:
        raise NonBinaryFeature(names[int(bad[0])])
    return out


def fit_nb_off(
    ds: LabeledDataset, laplace_alpha: float = 1.0, sample_weight=None
) -> NbOffModel:
    """Estimate the Naive Bayes log-ratios from (weighted) frequency counts.

    Optional-feature ratios count the joint event "value v AND disclosed"
    within each class, divided by the class mass, so the withholding
    mechanism is baked into the factor.  ``laplace_alpha`` is added to every
    count cell (alpha=0 reproduces exact ratios on exact counts).
    """
    if laplace_alpha < 0:
        raise ValueError("laplace_alpha must be nonnegative")
    alpha = float(laplace_alpha)
    w = np.ones(ds.n_rows) if sample_weight is None else np.asarray(sample_weight, float)
    B = _as_binary(ds.base, ds.schema.base_names)
    avail = ds.mask
    Z = _as_binary(np.where(avail, ds.optional_values, 0.0), ds.schema.optional_names)
    y = ds.labels
    mass = np.array([np.sum(w[y == 0]), np.sum(w[y == 1])])
    if np.any(mass <= 0):
        raise DegenerateLabels()

    def log_ratio(count1: float, count0: float) -> float:
        with np.errstate(divide="ignore"):
            num = np.log(count1 + alpha) - np.log(mass[1] + 2 * alpha)
            den = np.log(count0 + alpha) - np.log(mass[0] + 2 * alpha)
        return float(num - den)

    n, r = ds.n_base, ds.n_optional
    base_lr = np.zeros((n, 2))
    for i in range(n):
        for v in (0, 1):
            base_lr[i, v] = log_ratio(
                np.sum(w[(B[:, i] == v) & (y == 1)]),
                np.sum(w[(B[:, i] == v) & (y == 0)]),
            )
    opt_lr = np.zeros((r, 2))
    for i in range(r):
        for v in (0, 1):
            disclosed = avail[:, i] & (Z[:, i] == v)
            opt_lr[i, v] = log_ratio(
                np.sum(w[disclosed & (y == 1)]),
                np.sum(w[disclosed & (y == 0)]),
            )
    prior = float(np.log(mass[1] + alpha) - np.log(mass[0] + alpha))
    return NbOffModel(prior_log_odds=prior, base_log_ratios=base_lr,
                      optional_log_ratios=opt_lr, schema=ds.schema)


def predict_nb_off(m: NbOffModel, b, a, z) -> float:
    b = np.asarray(b)
    a = np.asarray(a)
    z = np.asarray(z)
    n, r = m.base_log_ratios.shape[0], m.optional_log_ratios.shape[0]
    if b.shape != (n,):
        raise DimensionMismatch(n, b.size)
    if a.shape != (r,) or z.shape != (r,):
        raise DimensionMismatch(r, a.size)
    score = m.prior_log_odds
    for i, v in enumerate(b):
        if v not in (0, 1):
            raise NonBinaryFeature(m.schema.base_names[i])
        score += m.base_log_ratios[i, int(v)]
    for i in key_from_availability(a):
        if z[i] not in (0, 1):
            raise NonBinaryFeature(m.schema.optional_names[i])
        score += m.optional_log_ratios[i, int(z[i])]
    return float(sigmoid(score))


# ---------------------------------------------------------------------------
# Conditional-statistical-parity baseline (single optional feature)


@dataclass(frozen=True, eq=False)
class CspModel:
    """Scores non-disclosers by the disclosing population's mean given b.

    Both components are estimated on disclosing rows only, so the model never
    sees how non-disclosers actually fared -- which is exactly why it can be
    worse than a plain base-features model.
    """

    provider_base: object   # estimates E[Y | b, disclosed]
    provider_full: object   # estimates E[Y | b, z, disclosed]
    schema: Schema
    n_fits: int = field(default=2, compare=False)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        if ds.schema.n_optional != 1:
            raise DimensionMismatch(1, ds.schema.n_optional)
        out = np.empty(ds.n_rows)
        prov = ds.mask[:, 0]
        if np.any(~prov):
            out[~prov] = self.provider_base.predict_matrix(ds.base[~prov])
        if np.any(prov):
            X = np.hstack([ds.base[prov], ds.optional_values[prov, 0:1]])
            out[prov] = self.provider_full.predict_matrix(X)
        return out


def fit_csp(ds: LabeledDataset, cfg: FitConfig = FitConfig(), fitter=None) -> CspModel:
    """Fit the two CSP components on the disclosing subset (r=1 only)."""
    if ds.n_optional != 1:
        raise ValueError("the CSP baseline is defined for exactly one optional feature")
    if fitter is None:
        fitter = logistic_fitter(cfg)
    prov = np.flatnonzero(ds.mask[:, 0])
    try:
        model_a = fitter(ds.base[prov], ds.labels[prov], None)
        X = np.hstack([ds.base[prov], ds.optional_values[prov, 0:1]])
        model_b = fitter(X, ds.labels[prov], None)
    except DegenerateLabels:
        raise InsufficientSubset((0,), int(prov.size)) from None
    return CspModel(provider_base=model_a, provider_full=model_b, schema=ds.schema)


def predict_csp(m: CspModel, b, a, z) -> float:
    b = np.asarray(b, dtype=float)
    a_val = int(np.asarray(a).reshape(-1)[0])
    if a_val:
        z_val = float(np.asarray(z).reshape(-1)[0])
        x = np.concatenate([b, [z_val]])
        return float(m.provider_full.predict_matrix(x[None, :])[0])
    return float(m.provider_base.predict_matrix(b[None, :])[0])


# ---------------------------------------------------------------------------
# Reference models: base features only, and zero-imputed (unfair)


@dataclass(frozen=True, eq=False)
class BaseModel:
    params: LogisticParams
    schema: Schema
    n_fits: int = field(default=1, compare=False)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        return predict_proba(self.params, drop_optional(ds))


@dataclass(frozen=True, eq=False)
class ImputedModel:
    params: LogisticParams
    schema: Schema
    add_indicator: bool
    n_fits: int = field(default=1, compare=False)

    def predict(self, ds: LabeledDataset) -> np.ndarray:
        return predict_proba(self.params, impute_zero(ds, self.add_indicator))


def fit_base(ds: LabeledDataset, cfg: FitConfig = FitConfig()) -> BaseModel:
    return BaseModel(fit_logistic(drop_optional(ds), ds.labels, cfg), ds.schema)


def fit_imputed(
    ds: LabeledDataset, cfg: FitConfig = FitConfig(), add_indicator: bool = True
) -> ImputedModel:
    X = impute_zero(ds, add_indicator)
    return ImputedModel(fit_logistic(X, ds.labels, cfg), ds.schema, add_indicator)


# ---------------------------------------------------------------------------
# Exact finite-distribution oracle


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Weighted atoms (b, a, z, y) of a finite data distribution.

    Value entries at undisclosed positions are carried but ignored by every
    consumer.  Weights must be nonnegative and sum to one.
    """

    base: np.ndarray     # (M, n)
    avail: np.ndarray    # (M, r) bool
    values: np.ndarray   # (M, r)
    labels: np.ndarray   # (M,)
    weights: np.ndarray  # (M,)

    def __post_init__(self):
        conv = {
            "base": np.asarray(self.base, dtype=float),
            "avail": np.asarray(self.avail, dtype=bool),
            "values": np.asarray(self.values, dtype=float),
            "labels": np.asarray(self.labels, dtype=np.int64),
            "weights": np.asarray(self.weights, dtype=float),
        }
        for name, arr in conv.items():
            arr = np.array(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValueError("labels must be 0/1")

    @property
    def n_base(self) -> int:
        return self.base.shape[1]

    @property
    def n_optional(self) -> int:
        return self.avail.shape[1]

    @classmethod
    def from_atoms(cls, atoms) -> "FiniteDistribution":
        """Build from an iterable of (b, a, z, y, weight) tuples."""
        base, avail, values, labels, weights = [], [], [], [], []
        for b, a, z, y, w in atoms:
            base.append(b)
            avail.append(a)
            values.append(z)
            labels.append(y)
            weights.append(w)
        return cls(np.asarray(base, float), np.asarray(avail, bool),
                   np.asarray(values, float), labels, weights)

    def as_dataset(self) -> tuple[LabeledDataset, np.ndarray]:
        """One dataset row per atom plus the matching weight vector."""
        n, r = self.n_base, self.n_optional
        schema = Schema(
            base_names=tuple(f"b{i + 1}" for i in range(n)),
            optional_names=tuple(f"z{i + 1}" for i in range(r)),
            label_name="y",
        )
        ds = LabeledDataset(
            base=self.base,
            optional_values=np.where(self.avail, self.values, np.nan),
            mask=self.avail,
            labels=self.labels,
            schema=schema,
        )
        return ds, np.array(self.weights)


def brute_force_off(dist: FiniteDistribution, b, a, z) -> float:
    """Exact conditional mean of the label given b, the disclosed values,
    and the event that at least those features were disclosed.

    Atoms that disclosed a superset of the queried features are included,
    i.e. the availability of everything outside the query is marginalized.
    """
    b = np.asarray(b, dtype=float)
    keep = np.flatnonzero(np.asarray(a, dtype=bool))
    sel = (dist.base == b).all(axis=1)
    if keep.size:
        z = np.asarray(z, dtype=float)
        sel &= dist.avail[:, keep].all(axis=1)
        sel &= (dist.values[:, keep] == z[keep]).all(axis=1)
    mass = float(np.sum(dist.weights[sel]))
    if mass <= 0.0:
        raise ZeroMassEvent()
    return float(np.sum(dist.weights[sel] * dist.labels[sel]) / mass)


# ---------------------------------------------------------------------------
# JSON serialization (logistic-parameter models only)


def model_to_json(model) -> dict:
    schema = model.schema.to_json()
    if isinstance(model, BaseModel):
        return {"model_type": "base", "params": model.params.to_json(), "schema": schema}
    if isinstance(model, ImputedModel):
        return {"model_type": "imputed", "params": model.params.to_json(),
                "add_indicator": model.add_indicator, "schema": schema}
    if isinstance(model, OffLrModel):
        return {"model_type": "off_lr", "w": model.w.tolist(), "t": model.t,
                "omega": model.omega.tolist(), "beta": model.beta.tolist(),
                "s": model.s.tolist(), "schema": schema}
    if isinstance(model, NbOffModel):
        return {"model_type": "nb_off", "prior_log_odds": model.prior_log_odds,
                "base_log_ratios": model.base_log_ratios.tolist(),
                "optional_log_ratios": model.optional_log_ratios.tolist(),
                "schema": schema}
    if isinstance(model, CspModel):
        return {"model_type": "csp",
                "provider_base": _submodel_params(model.provider_base),
                "provider_full": _submodel_params(model.provider_full),
                "schema": schema}
    if isinstance(model, MultiModel):
        r = model.schema.n_optional
        return {
            "model_type": "multi",
            "submodels": {key_to_bitstring(k, r): _submodel_params(sm)
                          for k, sm in model.submodels.items()},
            "fallbacks": {key_to_bitstring(k, r): key_to_bitstring(v, r)
                          for k, v in model.fallbacks.items()},
            "schema": schema,
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _submodel_params(submodel) -> dict:
    if not isinstance(submodel, LogisticSubmodel):
        raise TypeError("only logistic submodels are JSON-serializable")
    return submodel.params.to_json()


def model_from_json(obj: dict):
    schema = Schema.from_json(obj["schema"])
    kind = obj["model_type"]
    if kind == "base":
        return BaseModel(LogisticParams.from_json(obj["params"]), schema)
    if kind == "imputed":
        return ImputedModel(LogisticParams.from_json(obj["params"]), schema,
                            bool(obj["add_indicator"]))
    if kind == "off_lr":
        return OffLrModel(
            w=np.asarray(obj["w"], float), t=float(obj["t"]),
            omega=np.asarray(obj["omega"], float).reshape(len(obj["beta"]), len(obj["w"])),
            beta=np.asarray(obj["beta"], float), s=np.asarray(obj["s"], float),
            schema=schema)
    if kind == "nb_off":
        return NbOffModel(
            prior_log_odds=float(obj["prior_log_odds"]),
            base_log_ratios=np.asarray(obj["base_log_ratios"], float).reshape(-1, 2),
            optional_log_ratios=np.asarray(obj["optional_log_ratios"], float).reshape(-1, 2),
            schema=schema)
    if kind == "csp":
        return CspModel(
            provider_base=LogisticSubmodel(LogisticParams.from_json(obj["provider_base"])),
            provider_full=LogisticSubmodel(LogisticParams.from_json(obj["provider_full"])),
            schema=schema)
    if kind == "multi":
        submodels = {key_from_bitstring(bits): LogisticSubmodel(LogisticParams.from_json(p))
                     for bits, p in obj["submodels"].items()}
        fallbacks = {key_from_bitstring(k): key_from_bitstring(v)
                     for k, v in obj.get("fallbacks", {}).items()}
        for k, donor in fallbacks.items():
            submodels[k] = submodels[donor]
        return MultiModel(submodels=submodels, schema=schema, fallbacks=fallbacks)
    raise ValueError(f"unknown model_type {kind!r}")
