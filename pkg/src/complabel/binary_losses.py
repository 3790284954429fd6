"""Scalar binary losses l(z) and their derivatives.

All functions accept scalars or numpy arrays and evaluate in float64.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .exceptions import InvalidInputError, UnsupportedError, UnsupportedGradientError


class BinaryLossKind(str, Enum):
    ZERO_ONE = "zero-one"
    SIGMOID = "sigmoid"
    RAMP = "ramp"
    SQUARED_HINGE = "squared-hinge"

    @classmethod
    def parse(cls, name: "str | BinaryLossKind") -> "BinaryLossKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise InvalidInputError(f"unknown loss {name!r} (expected one of {valid})") from None

    @property
    def is_symmetric(self) -> bool:
        return self is not BinaryLossKind.SQUARED_HINGE


def _finite(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("loss argument must be finite")
    return z


def _out(a: np.ndarray):
    return float(a) if a.ndim == 0 else a


def _sigmoid_loss(z: np.ndarray) -> np.ndarray:
    # 1 / (1 + e^z), branch form so exp never overflows
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))


def _value(kind: BinaryLossKind, z: np.ndarray) -> np.ndarray:
    if kind is BinaryLossKind.ZERO_ONE:
        return (z <= 0).astype(np.float64)
    if kind is BinaryLossKind.SIGMOID:
        return _sigmoid_loss(z)
    if kind is BinaryLossKind.RAMP:
        return 0.5 * np.clip(1.0 - z, 0.0, 2.0)
    return np.maximum(0.0, 1.0 - z) ** 2


def _grad(kind: BinaryLossKind, z: np.ndarray) -> np.ndarray:
    if kind is BinaryLossKind.ZERO_ONE:
        raise UnsupportedGradientError("the zero-one loss is evaluation-only")
    if kind is BinaryLossKind.SIGMOID:
        s = _sigmoid_loss(z)
        return -s * (1.0 - s)
    if kind is BinaryLossKind.RAMP:
        return np.where(np.abs(z) <= 1.0, -0.5, 0.0)
    return -2.0 * np.maximum(0.0, 1.0 - z)


def loss_value(kind: BinaryLossKind, z):
    """Evaluate the binary loss ``kind`` at ``z`` (scalar or array)."""
    kind = BinaryLossKind.parse(kind)
    return _out(_value(kind, _finite(z)))


def loss_grad(kind: BinaryLossKind, z):
    """Derivative dl/dz.

    For the ramp loss the subgradient -1/2 is used on the closed interval
    [-1, 1], and 0 outside it.
    """
    kind = BinaryLossKind.parse(kind)
    if kind is BinaryLossKind.ZERO_ONE:
        raise UnsupportedGradientError("the zero-one loss is evaluation-only")
    return _out(_grad(kind, _finite(z)))


_LIPSCHITZ = {BinaryLossKind.SIGMOID: 0.25, BinaryLossKind.RAMP: 0.5}


def lipschitz_constant(kind: BinaryLossKind) -> float:
    kind = BinaryLossKind.parse(kind)
    if kind not in _LIPSCHITZ:
        raise UnsupportedError(f"{kind.value} loss has no global Lipschitz constant")
    return _LIPSCHITZ[kind]


def check_symmetry(kind: BinaryLossKind, grid) -> float:
    """Return max |l(z) + l(-z) - 1| over ``grid``."""
    z = _finite(np.atleast_1d(grid))
    if z.size == 0:
        raise InvalidInputError("symmetry grid must be nonempty")
    dev = np.abs(loss_value(kind, z) + loss_value(kind, -z) - 1.0)
    return float(np.max(dev))
