"""Bayesian hyperparameter search: GP surrogate + expected improvement.

Configurations are encoded into the unit cube (min-max, log-domain min-max,
rounded integers, one-hot categoricals). A Matern 5/2 GP with grid-selected
kernel hyperparameters models the objective; after a handful of seeded
space-filling trials, each step proposes the expected-improvement argmax
over a fixed budget of seeded candidate points.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import NumericalError, ParameterError

N_INITIAL = 8
N_CANDIDATES = 2048


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # continuous | log | integer | categorical
    low: float | None = None
    high: float | None = None
    choices: tuple | None = None

    def __post_init__(self):
        if self.kind in ("continuous", "log", "integer"):
            if self.low is None or self.high is None or not self.low < self.high:
                raise ParameterError(
                    f"{self.name}: needs finite bounds with low < high")
            if not (math.isfinite(self.low) and math.isfinite(self.high)):
                raise ParameterError(f"{self.name}: bounds must be finite")
            if self.kind == "log" and self.low <= 0:
                raise ParameterError(f"{self.name}: log bounds must be positive")
        elif self.kind == "categorical":
            if not self.choices:
                raise ParameterError(f"{self.name}: needs nonempty choices")
        else:
            raise ParameterError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def width(self) -> int:
        return len(self.choices) if self.kind == "categorical" else 1


class SearchSpace:
    def __init__(self, params: list[ParamSpec]):
        if not params:
            raise ParameterError("search space is empty")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ParameterError("duplicate parameter names")
        self.params = list(params)
        self.dim = sum(p.width for p in params)

    def encode(self, config: dict) -> np.ndarray:
        point = np.empty(self.dim)
        i = 0
        for p in self.params:
            if p.name not in config:
                raise ParameterError(f"config missing parameter {p.name!r}")
            value = config[p.name]
            if p.kind == "categorical":
                if value not in p.choices:
                    raise ParameterError(f"{p.name}: {value!r} not a choice")
                onehot = np.zeros(len(p.choices))
                onehot[p.choices.index(value)] = 1.0
                point[i:i + p.width] = onehot
            else:
                lo, hi = p.low, p.high
                if not lo <= value <= hi:
                    raise ParameterError(
                        f"{p.name}: {value} outside [{lo}, {hi}]")
                if p.kind == "log":
                    point[i] = (math.log(value) - math.log(lo)) / \
                        (math.log(hi) - math.log(lo))
                else:
                    point[i] = (value - lo) / (hi - lo)
            i += p.width
        return point

    def decode(self, point: np.ndarray) -> dict:
        config = {}
        i = 0
        for p in self.params:
            if p.kind == "categorical":
                config[p.name] = p.choices[int(np.argmax(point[i:i + p.width]))]
            else:
                x = float(np.clip(point[i], 0.0, 1.0))
                if p.kind == "log":
                    value = math.exp(math.log(p.low)
                                     + x * (math.log(p.high) - math.log(p.low)))
                elif p.kind == "integer":
                    value = int(round(p.low + x * (p.high - p.low)))
                else:
                    value = p.low + x * (p.high - p.low)
                config[p.name] = value
            i += p.width
        return config

    @classmethod
    def from_json(cls, payload) -> "SearchSpace":
        if isinstance(payload, (str, bytes)):
            payload = json.loads(payload)
        params = []
        for entry in payload:
            params.append(ParamSpec(
                name=entry["name"], kind=entry["kind"],
                low=entry.get("low"), high=entry.get("high"),
                choices=tuple(entry["choices"]) if "choices" in entry else None,
            ))
        return cls(params)


@dataclass
class TrialRecord:
    config: dict
    objective: float  # -inf marks a failed trial
    seed: int = 0
    wall_time: float = 0.0
    status: str = "ok"

    def to_json(self) -> str:
        payload = dict(config=self.config, seed=self.seed,
                       wall_time=self.wall_time, status=self.status,
                       objective=None if self.status == "failed"
                       else self.objective)
        return json.dumps(payload)

    @classmethod
    def from_json(cls, line: str) -> "TrialRecord":
        payload = json.loads(line)
        objective = payload.get("objective")
        return cls(config=payload["config"],
                   objective=-math.inf if objective is None else float(objective),
                   seed=int(payload.get("seed", 0)),
                   wall_time=float(payload.get("wall_time", 0.0)),
                   status=payload.get("status", "ok"))


# ---------------------------------------------------------------------------
# Gaussian process surrogate (Matern 5/2)
# ---------------------------------------------------------------------------


@dataclass
class GPState:
    x: np.ndarray            # (n, d) normalized inputs
    y_mean: float
    y_centered: np.ndarray   # (n,)
    lengthscale: float
    signal: float            # signal variance
    noise: float             # noise variance
    chol: np.ndarray         # lower Cholesky factor of K + noise I
    alpha: np.ndarray        # (K + noise I)^-1 y_centered


def matern52(a: np.ndarray, b: np.ndarray, lengthscale: float,
             signal: float) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    r = np.sqrt(np.maximum(d2, 0.0)) / lengthscale
    s5r = math.sqrt(5.0) * r
    return signal * (1.0 + s5r + 5.0 * d2 / (3.0 * lengthscale ** 2)) * np.exp(-s5r)


def _cholesky_with_jitter(gram: np.ndarray) -> np.ndarray:
    jitter = 0.0
    scale = float(np.mean(np.diag(gram)))
    for _ in range(8):
        try:
            return cholesky(gram + jitter * np.eye(len(gram)), lower=True)
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10.0, 1e-12 * scale)
    raise NumericalError("kernel matrix is not positive definite even with jitter")


def _log_marginal_likelihood(chol, y_centered) -> float:
    alpha = cho_solve((chol, True), y_centered)
    return float(-0.5 * y_centered @ alpha
                 - np.log(np.diag(chol)).sum()
                 - 0.5 * len(y_centered) * math.log(2.0 * math.pi))


_LENGTHSCALE_GRID = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0)
_SIGNAL_GRID = (0.25, 1.0, 4.0)


def gp_fit(points: np.ndarray, objectives: np.ndarray, noise: float = 1e-6,
           lengthscale_grid=_LENGTHSCALE_GRID,
           signal_grid=_SIGNAL_GRID) -> GPState:
    """Fit the surrogate, grid-selecting (lengthscale, signal variance)."""
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    y = np.asarray(objectives, dtype=np.float64).ravel()
    if len(x) != len(y) or len(y) == 0:
        raise ParameterError(f"{len(x)} points but {len(y)} objectives")
    if noise <= 0:
        raise ParameterError(f"noise variance must be positive, got {noise}")
    y_mean = float(y.mean())
    y_centered = y - y_mean
    y_scale = float(np.var(y_centered))
    best = None
    for lengthscale in lengthscale_grid:
        for signal_rel in signal_grid:
            signal = signal_rel * y_scale if y_scale > 0 else signal_rel
            gram = matern52(x, x, lengthscale, signal) + noise * np.eye(len(x))
            chol = _cholesky_with_jitter(gram)
            lml = _log_marginal_likelihood(chol, y_centered)
            if best is None or lml > best[0]:
                best = (lml, lengthscale, signal, chol)
    _, lengthscale, signal, chol = best
    alpha = cho_solve((chol, True), y_centered)
    return GPState(x=x, y_mean=y_mean, y_centered=y_centered,
                   lengthscale=lengthscale, signal=signal, noise=noise,
                   chol=chol, alpha=alpha)


def gp_posterior(state: GPState, query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and (latent) variance at one or more query points."""
    q = np.atleast_2d(np.asarray(query, dtype=np.float64))
    if q.shape[1] != state.x.shape[1]:
        raise ParameterError(
            f"query dim {q.shape[1]} != training dim {state.x.shape[1]}")
    k_star = matern52(state.x, q, state.lengthscale, state.signal)  # (n, m)
    mean = state.y_mean + k_star.T @ state.alpha
    v = solve_triangular(state.chol, k_star, lower=True)
    variance = np.maximum(state.signal - (v * v).sum(axis=0), 0.0)
    if np.ndim(query) == 1:
        return float(mean[0]), float(variance[0])
    return mean, variance


def expected_improvement(mean, variance, best_observed: float,
                         maximize: bool = True):
    """Closed-form EI; at zero variance it degenerates to max(0, improvement)."""
    mean = np.asarray(mean, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    if np.any(variance < 0):
        raise ParameterError("variance must be nonnegative")
    improvement = (mean - best_observed) if maximize else (best_observed - mean)
    sigma = np.sqrt(variance)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, improvement / np.where(sigma > 0, sigma, 1.0), 0.0)
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    ei = np.where(sigma > 0,
                  improvement * ndtr(z) + sigma * pdf,
                  np.maximum(improvement, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def _initial_points(n: int, dim: int, seed: int) -> np.ndarray:
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    return sampler.random(n)


def suggest_next(history: list[TrialRecord], space: SearchSpace,
                 seed: int = 0) -> dict:
    """Space-filling draws for the first trials, then the EI argmax over a
    seeded candidate set."""
    t = len(history)
    if t < N_INITIAL:
        point = _initial_points(N_INITIAL, space.dim, seed)[t]
        return space.decode(point)
    ok = [r for r in history if r.status == "ok" and math.isfinite(r.objective)]
    rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
    candidates = rng.random((N_CANDIDATES, space.dim))
    if not ok:
        return space.decode(candidates[0])
    x = np.stack([space.encode(r.config) for r in ok])
    y = np.array([r.objective for r in ok])
    state = gp_fit(x, y, noise=1e-4)
    mean, variance = gp_posterior(state, candidates)
    ei = expected_improvement(mean, variance, float(y.max()), maximize=True)
    return space.decode(candidates[int(np.argmax(ei))])


def load_history(path) -> list[TrialRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(TrialRecord.from_json(line))
    return records


def optimize(objective: Callable[[dict, int], float], space: SearchSpace,
             budget: int, seed: int = 0,
             history_path=None) -> tuple[TrialRecord, list[TrialRecord]]:
    """Run the trial loop; resumes from history_path when it already exists.

    ``objective(config, trial_seed)`` returns the score to maximize. A trial
    that raises is recorded as failed (objective -inf) and the loop continues.
    """
    if budget < 1:
        raise ParameterError(f"budget must be >= 1, got {budget}")
    history: list[TrialRecord] = []
    if history_path is not None:
        try:
            history = load_history(history_path)
        except FileNotFoundError:
            history = []
    sink = open(history_path, "a", encoding="utf-8") if history_path else None
    try:
        while len(history) < budget:
            trial_seed = seed + len(history)
            config = suggest_next(history, space, seed)
            start = time.perf_counter()
            try:
                value = float(objective(config, trial_seed))
                record = TrialRecord(config, value, trial_seed,
                                     time.perf_counter() - start, "ok")
            except Exception:  # noqa: BLE001 - failed trials must not kill the loop
                record = TrialRecord(config, -math.inf, trial_seed,
                                     time.perf_counter() - start, "failed")
            history.append(record)
            if sink is not None:
                sink.write(record.to_json() + "\n")
                sink.flush()
    finally:
        if sink is not None:
            sink.close()
    finished = [r for r in history if r.status == "ok"]
    if not finished:
        raise NumericalError("every trial failed")
    best = max(finished, key=lambda r: r.objective)
    return best, history


# ---------------------------------------------------------------------------
# model-kind plumbing
# ---------------------------------------------------------------------------


def default_search_space(kind: str) -> SearchSpace:
    common = [
        ParamSpec("lr", "log", 1e-5, 1e-1),
        ParamSpec("batch_size", "categorical", choices=(32, 64, 128, 256)),
        ParamSpec("dropout", "continuous", 0.0, 0.5),
    ]
    if kind == "relatednet":
        extra = [ParamSpec("hidden_a", "integer", 64, 1024),
                 ParamSpec("hidden_b", "integer", 64, 1024),
                 ParamSpec("k", "integer", 1, 10)]
    elif kind == "topknet":
        extra = [ParamSpec("hidden_a", "integer", 8, 128),
                 ParamSpec("hidden_b", "integer", 8, 128),
                 ParamSpec("k", "integer", 1, 10)]
    elif kind == "agreemnet":
        extra = [ParamSpec("hidden_a", "integer", 8, 128),
                 ParamSpec("hidden_b", "integer", 8, 128),
                 ParamSpec("num_heads", "integer", 1, 16)]
    else:
        raise ParameterError(f"unknown model kind {kind!r}")
    return SearchSpace(common + extra)


def tune(kind: str, train, validation, space: SearchSpace | None, budget: int,
         seed: int = 0, epochs: int = 15, history_path=None
         ) -> tuple[TrialRecord, list[TrialRecord]]:
    """Trial loop over real model training, scoring validation unweighted
    average class accuracy."""
    from .relatednet import RelatedNetClassifier
    from .stage2 import AgreemNetClassifier, TopKNetClassifier
    from .training import unweighted_average_class_accuracy

    if space is None:
        space = default_search_space(kind)
    estimator_cls = {"relatednet": RelatedNetClassifier,
                     "topknet": TopKNetClassifier,
                     "agreemnet": AgreemNetClassifier}[kind]

    def objective(config: dict, trial_seed: int) -> float:
        estimator = estimator_cls(**config, epochs=epochs, seed=trial_seed,
                                  validation_fraction=0.0)
        estimator.fit(train, validation=validation)
        if kind == "relatednet":
            from .data import StanceLabel

            y = (validation.labels() != int(StanceLabel.UNR)).astype(int)
        else:
            y = validation.labels()
        pred = estimator.predict(validation)
        return unweighted_average_class_accuracy(y, pred)

    return optimize(objective, space, budget, seed, history_path)
