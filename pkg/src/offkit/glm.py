"""Binary logistic regression via damped Newton iterations.

The fitter minimizes the mean negative log-likelihood plus an l2 penalty on
the feature weights (the intercept is never penalized).  The ridge keeps the
optimum finite under perfect separation, so separation is reported through
the ``converged`` flag rather than raised as an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabels, DimensionMismatch, Singular

__all__ = [
    "FitConfig",
    "LogisticParams",
    "fit_logistic",
    "log_odds",
    "logit",
    "penalized_nll",
    "penalized_nll_grad",
    "predict_proba",
    "sigmoid",
]

# Probabilities are kept away from exact 0/1 when forming Newton weights so
# the Hessian stays invertible even under heavy saturation.
_P_FLOOR = 1e-12


def sigmoid(x):
    """Numerically stable logistic function, elementwise.

    Never overflows: the exponential is only ever taken of a non-positive
    argument.  Saturates monotonically to 0/1 for large |x|.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def logit(p):
    """Inverse of :func:`sigmoid` on (0, 1)."""
    p = np.asarray(p, dtype=float)
    out = np.log(p) - np.log1p(-p)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings for :func:`fit_logistic`."""

    l2_penalty: float = 1e-6
    max_iters: int = 100
    grad_tol: float = 1e-8

    def __post_init__(self):
        if not (self.l2_penalty >= 0 and np.isfinite(self.l2_penalty)):
            raise ValueError("l2_penalty must be a finite nonnegative real")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (self.grad_tol > 0):
            raise ValueError("grad_tol must be positive")

    def to_json(self) -> dict:
        return {
            "l2_penalty": self.l2_penalty,
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FitConfig":
        return cls(**obj)


@dataclass(frozen=True)
class LogisticParams:
    """Weights and intercept of one logistic fit.

    ``converged`` / ``grad_norm`` report whether the gradient criterion was
    met; ``trace`` holds the objective value per Newton iteration.
    """

    weights: np.ndarray
    intercept: float
    converged: bool = field(default=True, compare=False)
    grad_norm: float = field(default=0.0, compare=False)
    trace: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))
        if not (np.all(np.isfinite(w)) and np.isfinite(self.intercept)):
            raise ValueError("logistic parameters must be finite")

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_json(cls, obj: dict) -> "LogisticParams":
        return cls(weights=np.asarray(obj["weights"], dtype=float),
                   intercept=float(obj["intercept"]))


def _theta_split(theta: np.ndarray):
    return theta[:-1], theta[-1]


def penalized_nll(theta, X, y, l2_penalty, sample_weight=None) -> float:
    """Mean negative log-likelihood of a logistic model plus l2*(‖w‖^2).

    ``theta`` stacks the feature weights followed by the intercept.  With
    ``sample_weight`` the mean becomes a normalized weighted mean.
    """
    w, t = _theta_split(np.asarray(theta, dtype=float))
    eta = X @ w + t
    nll = np.logaddexp(0.0, eta) - y * eta
    if sample_weight is None:
        mean = float(np.mean(nll))
    else:
        mean = float(np.sum(sample_weight * nll) / np.sum(sample_weight))
    return mean + float(l2_penalty) * float(w @ w)


def penalized_nll_grad(theta, X, y, l2_penalty, sample_weight=None) -> np.ndarray:
    """Analytic gradient of :func:`penalized_nll` with respect to theta."""
    w, t = _theta_split(np.asarray(theta, dtype=float))
    resid = sigmoid(X @ w + t) - y
    if sample_weight is None:
        gw = X.T @ resid / X.shape[0]
        gt = float(np.mean(resid))
    else:
        total = np.sum(sample_weight)
        gw = X.T @ (sample_weight * resid) / total
        gt = float(np.sum(sample_weight * resid) / total)
    return np.concatenate([gw + 2.0 * l2_penalty * w, [gt]])


def fit_logistic(X, y, cfg: FitConfig = FitConfig(), sample_weight=None) -> LogisticParams:
    """Fit a binary logistic regression by Newton's method with step halving.

    Parameters
    ----------
    X : (N, d) array; d may be 0, in which case only the intercept is fit.
    y : (N,) array of 0/1 labels; both classes must be present.
    cfg : optimizer settings.
    sample_weight : optional nonnegative row weights.

    Raises
    ------
    DegenerateLabels : fewer than two rows or a single label class.
    Singular : Hessian not invertible (possible only with l2_penalty=0).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if sample_weight is not None:
        sample_weight = np.asarray(sample_weight, dtype=float)
        pos_mass = np.sum(sample_weight[y == 1])
        neg_mass = np.sum(sample_weight[y == 0])
        if n < 2 or pos_mass <= 0 or neg_mass <= 0:
            raise DegenerateLabels()
    elif n < 2 or not (0 < np.sum(y) < n):
        raise DegenerateLabels()

    lam = cfg.l2_penalty
    theta = np.zeros(d + 1)
    reg_diag = np.concatenate([np.full(d, 2.0 * lam), [0.0]])
    Xa = np.hstack([X, np.ones((n, 1))])
    wts = sample_weight if sample_weight is not None else None
    total = np.sum(wts) if wts is not None else float(n)

    trace = [penalized_nll(theta, X, y, lam, wts)]
    grad = penalized_nll_grad(theta, X, y, lam, wts)
    converged = False
    for _ in range(cfg.max_iters):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        p = sigmoid(Xa @ theta)
        mu = np.clip(p * (1.0 - p), _P_FLOOR, None)
        if wts is not None:
            mu = mu * wts
        hess = (Xa.T * mu) @ Xa / total + np.diag(reg_diag)
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise Singular() from None
        step = 1.0
        current = trace[-1]
        candidate = theta - step * direction
        value = penalized_nll(candidate, X, y, lam, wts)
        halvings = 0
        while value > current and halvings < 60:
            step *= 0.5
            halvings += 1
            candidate = theta - step * direction
            value = penalized_nll(candidate, X, y, lam, wts)
        if value > current:
            break  # no descent possible; stop at the current point
        theta = candidate
        trace.append(value)
        grad = penalized_nll_grad(theta, X, y, lam, wts)
    gnorm = float(np.linalg.norm(grad))
    converged = converged or gnorm <= cfg.grad_tol
    return LogisticParams(
        weights=theta[:-1],
        intercept=float(theta[-1]),
        converged=converged,
        grad_norm=gnorm,
        trace=tuple(trace),
    )


def predict_proba(params: LogisticParams, X) -> np.ndarray:
    """Rowwise positive-class probabilities sigmoid(Xw + t)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if X.shape[1] != params.n_features:
        raise DimensionMismatch(params.n_features, X.shape[1])
    return sigmoid(X @ params.weights + params.intercept)


def log_odds(params: LogisticParams, x) -> float:
    """Exact linear score w·x + t for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a 1-D vector")
    if x.shape[0] != params.n_features:
        raise DimensionMismatch(params.n_features, x.shape[0])
    return float(params.weights @ x + params.intercept)
