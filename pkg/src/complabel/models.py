"""Score models: linear-in-input and K independent d-3-1 ReLU networks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .comp_losses import (
    LossSpec,
    Scheme,
    _check_differentiable,
    _comp_grads,
    _comp_values,
    _multiclass_grads,
    _multiclass_values,
    _prepare,
)
from .exceptions import InvalidInputError

HIDDEN_UNITS = 3


def _check_x(X, d: int):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != d:
        raise InvalidInputError(f"expected inputs of dimension {d}, got shape {np.shape(X)}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("inputs must be finite")
    return X, single


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class _Model:
    kind: str
    K: int
    d: int

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.ravel(a) for a in self._arrays()])

    @classmethod
    def from_flat(cls, flat, K: int, d: int):
        flat = np.asarray(flat, dtype=np.float64)
        shapes = cls._shapes(K, d)
        total = sum(math.prod(s) for s in shapes)
        if flat.shape != (total,):
            raise InvalidInputError(f"expected {total} parameters, got {flat.shape}")
        parts, pos = [], 0
        for s in shapes:
            size = math.prod(s)
            parts.append(flat[pos:pos + size].reshape(s).copy())
            pos += size
        return cls(*parts)

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self._arrays())

    def weight_mask(self) -> np.ndarray:
        """Flat 0/1 mask selecting the L2-regularized (non-bias) parameters."""
        return np.concatenate([np.full(a.size, float(w)) for a, w in zip(self._arrays(), self._is_weight)])

    def with_flat(self, flat):
        return type(self).from_flat(flat, self.K, self.d)

    def scores(self, X):
        X, single = _check_x(X, self.d)
        s = self._forward(X)[0]
        return s[0] if single else s

    def predict(self, X):
        """Argmax class (1-based); ties go to the smallest index."""
        s = np.atleast_2d(self.scores(X))
        pred = np.argmax(s, axis=1) + 1
        return int(pred[0]) if np.ndim(X) == 1 else pred


@dataclass(frozen=True)
class LinearModel(_Model):
    """g_k(x) = w_k . x + b_k."""

    weights: np.ndarray  # (K, d)
    biases: np.ndarray  # (K,)

    kind = "linear"
    _is_weight = (True, False)

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise InvalidInputError("linear model needs weights (K, d) and biases (K,)")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    @staticmethod
    def _shapes(K, d):
        return [(K, d), (K,)]

    def _arrays(self):
        return (self.weights, self.biases)

    @classmethod
    def init(cls, K: int, d: int, rng: np.random.Generator) -> "LinearModel":
        return cls(_uniform(rng, d, (K, d)), np.zeros(K))

    def _forward(self, X):
        return X @ self.weights.T + self.biases, None

    def _backward(self, X, cache, dS) -> np.ndarray:
        return np.concatenate([(dS.T @ X).ravel(), dS.sum(axis=0)])


@dataclass(frozen=True)
class MlpModel(_Model):
    """K independent one-hidden-layer ReLU networks, one per class.

    g_k(x) = out_w[k] . relu(hidden_w[k] @ x + hidden_b[k]) + out_b[k]
    """

    hidden_w: np.ndarray  # (K, 3, d)
    hidden_b: np.ndarray  # (K, 3)
    out_w: np.ndarray  # (K, 3)
    out_b: np.ndarray  # (K,)

    kind = "mlp"
    _is_weight = (True, False, True, False)

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=np.float64) for a in self._arrays()]
        W1, b1, w2, b2 = arrays
        K = b2.shape[0] if b2.ndim == 1 else -1
        if (W1.ndim != 3 or W1.shape[:2] != (K, HIDDEN_UNITS) or b1.shape != (K, HIDDEN_UNITS)
                or w2.shape != (K, HIDDEN_UNITS)):
            raise InvalidInputError("MLP needs hidden_w (K,3,d), hidden_b (K,3), out_w (K,3), out_b (K,)")
        for name, a in zip(("hidden_w", "hidden_b", "out_w", "out_b"), arrays):
            object.__setattr__(self, name, a)

    @property
    def K(self) -> int:
        return self.out_b.shape[0]

    @property
    def d(self) -> int:
        return self.hidden_w.shape[2]

    @staticmethod
    def _shapes(K, d):
        return [(K, HIDDEN_UNITS, d), (K, HIDDEN_UNITS), (K, HIDDEN_UNITS), (K,)]

    def _arrays(self):
        return (self.hidden_w, self.hidden_b, self.out_w, self.out_b)

    @classmethod
    def init(cls, K: int, d: int, rng: np.random.Generator) -> "MlpModel":
        return cls(_uniform(rng, d, (K, HIDDEN_UNITS, d)), np.zeros((K, HIDDEN_UNITS)),
                   _uniform(rng, HIDDEN_UNITS, (K, HIDDEN_UNITS)), np.zeros(K))

    def _forward(self, X):
        pre = np.einsum("khd,nd->nkh", self.hidden_w, X) + self.hidden_b
        act = np.maximum(pre, 0.0)
        s = np.einsum("nkh,kh->nk", act, self.out_w) + self.out_b
        return s, (pre, act)

    def _backward(self, X, cache, dS) -> np.ndarray:
        pre, act = cache
        g_out_w = np.einsum("nk,nkh->kh", dS, act)
        g_out_b = dS.sum(axis=0)
        # relu'(0) taken as 0
        d_pre = dS[:, :, None] * self.out_w[None] * (pre > 0)
        g_hidden_w = np.einsum("nkh,nd->khd", d_pre, X)
        g_hidden_b = d_pre.sum(axis=0)
        return np.concatenate([g_hidden_w.ravel(), g_hidden_b.ravel(), g_out_w.ravel(), g_out_b])


MODEL_TYPES = {"linear": LinearModel, "mlp": MlpModel}


def init_model(model_type: str, K: int, d: int, rng: np.random.Generator):
    try:
        cls = MODEL_TYPES[model_type]
    except KeyError:
        raise InvalidInputError(f"unknown model type {model_type!r} (expected linear or mlp)") from None
    return cls.init(K, d, rng)


@dataclass(frozen=True)
class Batch:
    """Minibatch for the combined objective; either part may be None."""

    ord_x: np.ndarray | None = None
    ord_y: np.ndarray | None = None
    comp_x: np.ndarray | None = None
    comp_y: np.ndarray | None = None

    @property
    def n_ord(self) -> int:
        return 0 if self.ord_x is None else len(self.ord_x)

    @property
    def n_comp(self) -> int:
        return 0 if self.comp_x is None else len(self.comp_x)


def objective_and_gradient(model, batch: Batch, spec: LossSpec, alpha: float, lam: float):
    """Value and flat gradient of the combined objective plus (lam/2)*||weights||^2.

    The objective is alpha * mean ordinary loss + (1 - alpha) * (K - 1) * mean
    complementary loss, with no additive constants.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError("alpha must lie in [0, 1]")
    use_ord = alpha > 0.0 and batch.n_ord > 0
    use_comp = alpha < 1.0 and batch.n_comp > 0
    if alpha > 0.0 and batch.n_ord == 0 or alpha < 1.0 and batch.n_comp == 0:
        raise InvalidInputError("batch lacks samples for a term with nonzero weight")
    if spec.scheme in (Scheme.ML, Scheme.PL) and use_ord:
        raise InvalidInputError("ordinary samples need the OVA or PC scheme")
    _check_differentiable(spec)
    K = model.K
    grad = np.zeros(model.n_params)
    value = 0.0
    if use_ord:
        X, _ = _check_x(batch.ord_x, model.d)
        s, cache = model._forward(X)
        s, idx, mask, _ = _prepare(s, batch.ord_y)
        coef = alpha / X.shape[0]
        value += coef * float(_multiclass_values(spec, s, idx, mask).sum())
        grad += model._backward(X, cache, _multiclass_grads(spec, s, idx, mask) * coef)
    if use_comp:
        X, _ = _check_x(batch.comp_x, model.d)
        s, cache = model._forward(X)
        s, idx, mask, _ = _prepare(s, batch.comp_y)
        coef = (1.0 - alpha) * (K - 1) / X.shape[0]
        value += coef * float(_comp_values(spec, s, idx, mask).sum())
        grad += model._backward(X, cache, _comp_grads(spec, s, idx, mask) * coef)
    if lam:
        w = model.flatten() * model.weight_mask()
        value += 0.5 * lam * float(w @ w)
        grad += lam * w
    return value, grad


def objective_gradient(model, batch: Batch, spec: LossSpec, alpha: float, lam: float) -> np.ndarray:
    return objective_and_gradient(model, batch, spec, alpha, lam)[1]


def save_params(model, path, seed: int | None = None) -> None:
    """Write a parameter CSV: a header row (model_type, K, d, seed) then one value per row."""
    lines = ["model_type,K,d,seed", f"{model.kind},{model.K},{model.d},{'' if seed is None else seed}", "value"]
    lines += [repr(float(v)) for v in model.flatten()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_params(path):
    """Inverse of :func:`save_params`; returns (model, seed)."""
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    if len(rows) < 3 or rows[0].strip() != "model_type,K,d,seed" or rows[2].strip() != "value":
        raise InvalidInputError(f"{path}: not a parameter file")
    kind, K, d, seed = rows[1].split(",")
    if kind not in MODEL_TYPES:
        raise InvalidInputError(f"{path}: unknown model type {kind!r}")
    flat = np.array([float(v) for v in rows[3:] if v.strip()])
    model = MODEL_TYPES[kind].from_flat(flat, int(K), int(d))
    return model, (int(seed) if seed.strip() else None)
