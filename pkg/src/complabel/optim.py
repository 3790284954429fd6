"""Adam, the minibatch training loop, and weight-decay grid search."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .binary_losses import BinaryLossKind
from .comp_losses import LossSpec, Scheme, _comp_values, _label_index, _multiclass_values, loss_constants
from .data import CompDataset, LabeledDataset
from .exceptions import InvalidInputError
from .models import Batch, objective_and_gradient

log = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = tuple(10.0 ** k for k in range(-4, 5))
MLP_LAMBDA_GRID = (1e-7, 1e-4, 1e-1)


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_params: int) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), 0)


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 5000
    batch_size: int = 100
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    weight_decay: float = 0.0
    eval_stride: int = 1
    seed: int = 0
    alpha: float = 0.0
    spec: LossSpec = field(default_factory=lambda: LossSpec.parse("pc", "sigmoid"))

    def __post_init__(self):
        if self.iterations < 1 or self.batch_size < 1 or self.eval_stride < 1:
            raise InvalidInputError("iterations, batch_size and eval_stride must be >= 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidInputError("betas must lie in [0, 1)")
        if self.epsilon <= 0 or self.learning_rate <= 0:
            raise InvalidInputError("epsilon and learning_rate must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError("alpha must lie in [0, 1]")
        if self.weight_decay < 0:
            raise InvalidInputError("weight_decay must be nonnegative")
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))

    @property
    def validation_scheme(self) -> Scheme:
        # ML/PL have no unbiased estimator of their own; score them with PC.
        return self.spec.scheme if self.spec.scheme in (Scheme.OVA, Scheme.PC) else Scheme.PC


def adam_step(params, grad, state: AdamState, config: TrainConfig):
    """One bias-corrected Adam update. Returns (new_params, new_state); inputs are not mutated."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape or state.m.shape != params.shape or state.v.shape != params.shape:
        raise InvalidInputError("parameter, gradient and moment shapes must agree")
    t = state.t + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1 ** t)
    v_hat = v / (1.0 - config.beta2 ** t)
    new = params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return new, AdamState(m, v, t)


@dataclass(frozen=True)
class DataSplit:
    """Ordinary and/or complementary parts of a training or validation set."""

    ordinary: LabeledDataset | None = None
    complementary: CompDataset | None = None

    @property
    def n_ord(self) -> int:
        return 0 if self.ordinary is None else self.ordinary.n

    @property
    def n_comp(self) -> int:
        return 0 if self.complementary is None else self.complementary.n


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    objective: float
    validation_score: float


@dataclass
class TrainResult:
    model: object
    history: list
    best_iteration: int
    best_score: float

    def history_csv(self) -> str:
        lines = ["iteration,objective,validation_score"]
        lines += [f"{h.iteration},{h.objective!r},{h.validation_score!r}" for h in self.history]
        return "\n".join(lines) + "\n"


class _EpochSampler:
    """Draws indices from successive seeded permutations of range(n)."""

    def __init__(self, n: int, rng: np.random.Generator):
        self.n, self.rng = n, rng
        self.perm = rng.permutation(n)
        self.pos = 0

    def draw(self, k: int) -> np.ndarray:
        out = []
        while k > 0:
            if self.pos == self.n:
                self.perm, self.pos = self.rng.permutation(self.n), 0
            take = min(k, self.n - self.pos)
            out.append(self.perm[self.pos:self.pos + take])
            self.pos += take
            k -= take
        return np.concatenate(out)


def _batch_sizes(config: TrainConfig, n_ord: int, n_comp: int) -> tuple[int, int]:
    B = config.batch_size
    if config.alpha == 1.0:
        return B, 0
    if config.alpha == 0.0:
        return 0, B
    b_ord = int(round(B * n_ord / (n_ord + n_comp)))
    b_ord = min(max(b_ord, 1), B - 1) if B > 1 else 1
    return b_ord, max(B - b_ord, 1)


def _validator(config: TrainConfig, val: DataSplit, K: int):
    """Zero-one combined validation score as a function of the model.

    Labels are indexed once here; the result equals
    :func:`complabel.risk.combined_validation_score` on the same data.
    """
    alpha = config.alpha
    if alpha > 0 and val.n_ord == 0 or alpha < 1 and val.n_comp == 0:
        raise InvalidInputError("validation data lacks a part required by alpha")
    zero_one = LossSpec(config.validation_scheme, BinaryLossKind.ZERO_ONE)
    m1, m2 = loss_constants(zero_one.scheme, K)
    parts = []
    if alpha > 0:
        parts.append((_multiclass_values, val.ordinary.X, *_label_index(val.ordinary.y, val.n_ord, K), alpha, 0.0))
    if alpha < 1:
        parts.append((_comp_values, val.complementary.X, *_label_index(val.complementary.ybar, val.n_comp, K),
                      (1.0 - alpha) * (K - 1), (1.0 - alpha) * (m2 - m1)))

    def score(model) -> float:
        total = 0.0
        for fn, X, idx, mask, coef, shift in parts:
            s = model._forward(X)[0]
            total += coef * float(np.mean(fn(zero_one, s, idx, mask))) + shift
        return total

    return score


def train(model, train_data: DataSplit, val_data: DataSplit, config: TrainConfig) -> TrainResult:
    """Minimize the combined objective with Adam and keep the best-validated snapshot.

    Every ``eval_stride`` iterations the zero-one validation score is computed;
    the returned model is the snapshot with the lowest score (earliest on ties).
    """
    alpha = config.alpha
    if alpha > 0 and train_data.n_ord == 0 or alpha < 1 and train_data.n_comp == 0:
        raise InvalidInputError("training data is empty for a term with nonzero weight")
    K = model.K
    score = _validator(config, val_data, K)
    rng = np.random.default_rng(config.seed)
    b_ord, b_comp = _batch_sizes(config, train_data.n_ord, train_data.n_comp)
    ord_sampler = _EpochSampler(train_data.n_ord, rng) if b_ord else None
    comp_sampler = _EpochSampler(train_data.n_comp, rng) if b_comp else None

    params = model.flatten()
    current = model
    state = AdamState.zeros(params.size)
    best_params, best_score, best_iter = params, np.inf, 0
    history = []
    for it in range(1, config.iterations + 1):
        batch_kw = {}
        if ord_sampler is not None:
            idx = ord_sampler.draw(b_ord)
            batch_kw.update(ord_x=train_data.ordinary.X[idx], ord_y=train_data.ordinary.y[idx])
        if comp_sampler is not None:
            idx = comp_sampler.draw(b_comp)
            batch_kw.update(comp_x=train_data.complementary.X[idx],
                            comp_y=train_data.complementary.ybar[idx])
        value, grad = objective_and_gradient(current, Batch(**batch_kw), config.spec, alpha,
                                             config.weight_decay)
        params, state = adam_step(params, grad, state, config)
        current = model.with_flat(params)
        if it % config.eval_stride == 0:
            val = score(current)
            history.append(HistoryRow(it, value, val))
            if val < best_score:
                best_params, best_score, best_iter = params, val, it
    return TrainResult(model.with_flat(best_params), history, best_iter, float(best_score))


@dataclass
class GridResult:
    best_lambda: float
    best_model: object
    table: list  # (lambda, best validation score, iteration of best)
    results: dict


def grid_search(lambda_grid, model, train_data: DataSplit, val_data: DataSplit,
                config: TrainConfig) -> GridResult:
    """Train once per weight decay from the same initial model; ties go to the smaller lambda."""
    grid = sorted(float(v) for v in lambda_grid)
    if not grid:
        raise InvalidInputError("lambda grid is empty")
    results, table = {}, []
    for lam in grid:
        res = train(model, train_data, val_data, replace(config, weight_decay=lam))
        results[lam] = res
        table.append((lam, res.best_score, res.best_iteration))
        log.debug("lambda=%g best_val=%.6f at it=%d", lam, res.best_score, res.best_iteration)
    best = min(grid, key=lambda lam: results[lam].best_score)
    return GridResult(best, results[best].model, table, results)
