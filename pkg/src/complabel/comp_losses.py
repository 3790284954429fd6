"""Multiclass losses built from a binary loss over per-class scores.

Scores are arrays of shape ``(K,)`` for a single pattern or ``(n, K)`` for a
batch; labels are 1-based class indices (an int or an ``(n,)`` array).
Single-pattern inputs return floats, batches return ``(n,)`` arrays (losses)
or ``(n, K)`` arrays (gradients).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .binary_losses import BinaryLossKind, _grad as loss_grad, _value as loss_value
from .exceptions import InvalidInputError, UnsupportedGradientError


class Scheme(str, Enum):
    OVA = "ova"
    PC = "pc"
    ML = "ml"
    PL = "pl"

    @classmethod
    def parse(cls, name: "str | Scheme") -> "Scheme":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise InvalidInputError(f"unknown scheme {name!r} (expected ova, pc, ml or pl)") from None


@dataclass(frozen=True)
class LossSpec:
    scheme: Scheme
    kind: BinaryLossKind

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "kind", BinaryLossKind.parse(self.kind))
        if self.scheme is Scheme.PL and self.kind is not BinaryLossKind.SQUARED_HINGE:
            raise InvalidInputError("the PL baseline is defined with the squared-hinge loss only")

    @classmethod
    def parse(cls, scheme: str, kind: str | None = None) -> "LossSpec":
        scheme = Scheme.parse(scheme)
        if kind is None:
            kind = "squared-hinge" if scheme is Scheme.PL else "sigmoid"
        elif scheme is Scheme.PL:
            kind = "squared-hinge"
        return cls(scheme, BinaryLossKind.parse(kind))

    def with_kind(self, kind: BinaryLossKind) -> "LossSpec":
        return LossSpec(self.scheme, kind)

    @property
    def name(self) -> str:
        return f"{self.scheme.value.upper()}/{self.kind.value}"


def _label_index(labels, n: int, K: int):
    lab = np.asarray(labels)
    if not np.issubdtype(lab.dtype, np.integer):
        if not np.all(np.equal(np.mod(lab, 1), 0)):
            raise InvalidInputError("labels must be integers")
        lab = lab.astype(np.int64)
    lab = np.broadcast_to(np.atleast_1d(lab), (n,))
    if np.any(lab < 1) or np.any(lab > K):
        raise InvalidInputError(f"labels must lie in 1..{K}")
    idx = lab.astype(np.intp) - 1
    mask = np.zeros((n, K), dtype=bool)
    mask[np.arange(n), idx] = True
    return idx, mask


def _prepare(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    single = s.ndim == 1
    s = np.atleast_2d(s)
    if s.ndim != 2:
        raise InvalidInputError("scores must have shape (K,) or (n, K)")
    n, K = s.shape
    if K < 2:
        raise InvalidInputError("need at least two classes")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("scores must be finite")
    idx, mask = _label_index(labels, n, K)
    return s, idx, mask, single


def _finish(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def _finish_grad(grad: np.ndarray, single: bool):
    return grad[0] if single else grad


def _require_scheme(spec: LossSpec, allowed) -> None:
    if spec.scheme not in allowed:
        names = "/".join(s.value for s in allowed)
        raise InvalidInputError(f"scheme {spec.scheme.value} not valid here (expected {names})")


def _picked(s: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return s[np.arange(s.shape[0]), idx]


# Unchecked kernels: s is (n, K) float64, idx the 0-based labels, mask their one-hot.

def _multiclass_values(spec, s, idx, mask):
    K = s.shape[1]
    gy = _picked(s, idx)
    if spec.scheme is Scheme.OVA:
        rest = np.where(mask, 0.0, loss_value(spec.kind, -s)).sum(axis=1)
        return loss_value(spec.kind, gy) + rest / (K - 1)
    return np.where(mask, 0.0, loss_value(spec.kind, gy[:, None] - s)).sum(axis=1)


def _comp_values(spec, s, idx, mask):
    K = s.shape[1]
    gbar = _picked(s, idx)
    if spec.scheme is Scheme.OVA:
        rest = np.where(mask, 0.0, loss_value(spec.kind, s)).sum(axis=1)
        return rest / (K - 1) + loss_value(spec.kind, -gbar)
    if spec.scheme is Scheme.PC:
        return np.where(mask, 0.0, loss_value(spec.kind, s - gbar[:, None])).sum(axis=1)
    if spec.scheme is Scheme.ML:
        pos = np.where(mask, 0.0, loss_value(spec.kind, s)).sum(axis=1)
        return pos + loss_value(spec.kind, -gbar)
    cand_mean = np.where(mask, 0.0, s).sum(axis=1) / (K - 1)
    return loss_value(spec.kind, cand_mean) + loss_value(spec.kind, -gbar)


def _comp_grads(spec, s, idx, mask):
    n, K = s.shape
    rows = np.arange(n)
    gbar = _picked(s, idx)
    if spec.scheme is Scheme.PC:
        d = np.where(mask, 0.0, loss_grad(spec.kind, s - gbar[:, None]))
        d[rows, idx] = -d.sum(axis=1)
    elif spec.scheme is Scheme.PL:
        cand_mean = np.where(mask, 0.0, s).sum(axis=1) / (K - 1)
        d = np.where(mask, 0.0, (loss_grad(spec.kind, cand_mean) / (K - 1))[:, None])
        d[rows, idx] = -loss_grad(spec.kind, -gbar)
    else:
        scale = 1.0 / (K - 1) if spec.scheme is Scheme.OVA else 1.0
        d = np.where(mask, 0.0, scale * loss_grad(spec.kind, s))
        d[rows, idx] = -loss_grad(spec.kind, -gbar)
    return d


def _multiclass_grads(spec, s, idx, mask):
    n, K = s.shape
    rows = np.arange(n)
    gy = _picked(s, idx)
    if spec.scheme is Scheme.OVA:
        d = np.where(mask, 0.0, -loss_grad(spec.kind, -s) / (K - 1))
        d[rows, idx] = loss_grad(spec.kind, gy)
    else:
        d = np.where(mask, 0.0, -loss_grad(spec.kind, gy[:, None] - s))
        d[rows, idx] = -d.sum(axis=1)
    return d


def multiclass_loss(spec: LossSpec, scores, y):
    """Ordinary OVA or PC loss of ``scores`` for true class ``y``."""
    _require_scheme(spec, (Scheme.OVA, Scheme.PC))
    s, idx, mask, single = _prepare(scores, y)
    return _finish(_multiclass_values(spec, s, idx, mask), single)


def comp_loss(spec: LossSpec, scores, ybar):
    """Complementary OVA or PC loss for complementary label ``ybar``."""
    _require_scheme(spec, (Scheme.OVA, Scheme.PC))
    s, idx, mask, single = _prepare(scores, ybar)
    return _finish(_comp_values(spec, s, idx, mask), single)


def baseline_loss(spec: LossSpec, scores, ybar):
    """Multi-label (ML) or partial-label (PL) baseline loss for ``ybar``.

    ML treats ``ybar`` as a negative label and every other class as positive.
    PL treats {1..K} minus ``ybar`` as the candidate set and applies the
    squared hinge to the mean candidate score and to the negated score of
    ``ybar``.
    """
    _require_scheme(spec, (Scheme.ML, Scheme.PL))
    s, idx, mask, single = _prepare(scores, ybar)
    return _finish(_comp_values(spec, s, idx, mask), single)


def complementary_objective_loss(spec: LossSpec, scores, ybar):
    """Per-sample training loss on complementary data for any scheme."""
    s, idx, mask, single = _prepare(scores, ybar)
    return _finish(_comp_values(spec, s, idx, mask), single)


def loss_constants(scheme: Scheme, K: int) -> tuple[float, float]:
    """(M1, M2) for which the complementary losses satisfy the sum and pairing identities."""
    scheme = Scheme.parse(scheme)
    if scheme not in (Scheme.OVA, Scheme.PC):
        raise InvalidInputError("loss constants exist only for the OVA and PC schemes")
    if int(K) != K or K < 2:
        raise InvalidInputError("K must be an integer >= 2")
    K = int(K)
    if scheme is Scheme.OVA:
        return float(K), 2.0
    return K * (K - 1) / 2.0, float(K - 1)


def _check_differentiable(spec: LossSpec) -> None:
    if spec.kind is BinaryLossKind.ZERO_ONE:
        raise UnsupportedGradientError("the zero-one loss is evaluation-only")


def comp_loss_grad(spec: LossSpec, scores, ybar):
    """Gradient of the complementary (or baseline) loss w.r.t. each score."""
    _check_differentiable(spec)
    s, idx, mask, single = _prepare(scores, ybar)
    return _finish_grad(_comp_grads(spec, s, idx, mask), single)


def multiclass_loss_grad(spec: LossSpec, scores, y):
    """Gradient of the ordinary OVA/PC loss w.r.t. each score."""
    _require_scheme(spec, (Scheme.OVA, Scheme.PC))
    _check_differentiable(spec)
    s, idx, mask, single = _prepare(scores, y)
    return _finish_grad(_multiclass_grads(spec, s, idx, mask), single)
