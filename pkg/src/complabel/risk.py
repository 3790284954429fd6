"""Empirical risk estimators and exact expectation oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binary_losses import BinaryLossKind
from .comp_losses import (
    LossSpec,
    Scheme,
    comp_loss,
    loss_constants,
    multiclass_loss,
)
from .exceptions import InvalidInputError

MAX_ORACLE_CELLS = 1000


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    n_comp: int
    n_ord: int
    spec: LossSpec
    alpha: float
    includes_constants: bool

    def __float__(self) -> float:
        return self.value


def _samples(samples, what: str):
    scores, labels = samples
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if scores.shape[0] == 0 or labels.shape[0] == 0:
        raise InvalidInputError(f"{what} sample set is empty")
    if scores.shape[0] != labels.shape[0]:
        raise InvalidInputError(f"{what} scores and labels differ in length")
    return scores, labels


def _check_K(scores: np.ndarray, K: int | None) -> int:
    if K is not None and scores.shape[1] != K:
        raise InvalidInputError(f"scores have {scores.shape[1]} columns, expected K={K}")
    return scores.shape[1]


def _comp_term(spec: LossSpec, samples, K) -> tuple[float, int, int]:
    scores, ybar = _samples(samples, "complementary")
    K = _check_K(scores, K)
    return (K - 1) * float(np.mean(comp_loss(spec, scores, ybar))), scores.shape[0], K


def empirical_comp_risk(spec: LossSpec, samples, K: int | None = None) -> RiskEstimate:
    """Unbiased classification-risk estimate from complementary samples.

    ``samples`` is a ``(scores, ybar)`` pair with scores of shape (n, K).
    """
    term, n, K = _comp_term(spec, samples, K)
    m1, m2 = loss_constants(spec.scheme, K)
    return RiskEstimate(term - m1 + m2, n, 0, spec, 0.0, True)


def empirical_ordinary_risk(spec: LossSpec, samples) -> RiskEstimate:
    scores, y = _samples(samples, "ordinary")
    value = float(np.mean(multiclass_loss(spec, scores, y)))
    return RiskEstimate(value, 0, scores.shape[0], spec, 1.0, True)


def combined_objective(alpha: float, ordinary, complementary, spec: LossSpec,
                       K: int | None = None, include_constants: bool = False) -> RiskEstimate:
    """Convex combination of the ordinary and complementary empirical risks.

    Without constants this is the trainable objective; with them the value
    is an unbiased estimate of the classification risk.  A sample set may be
    ``None`` when its coefficient is zero.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError("alpha must lie in [0, 1]")
    value, n_ord, n_comp = 0.0, 0, 0
    if alpha > 0.0:
        if ordinary is None:
            raise InvalidInputError("ordinary samples required when alpha > 0")
        est = empirical_ordinary_risk(spec, ordinary)
        value += alpha * est.value
        n_ord = est.n_ord
        K = _check_K(np.atleast_2d(ordinary[0]), K)
    if alpha < 1.0:
        if complementary is None:
            raise InvalidInputError("complementary samples required when alpha < 1")
        term, n_comp, K = _comp_term(spec, complementary, K)
        value += (1.0 - alpha) * term
        if include_constants:
            m1, m2 = loss_constants(spec.scheme, K)
            value += (1.0 - alpha) * (m2 - m1)
    return RiskEstimate(value, n_comp, n_ord, spec, alpha, include_constants)


def _zero_one(scheme) -> LossSpec:
    scheme = Scheme.parse(scheme)
    if scheme not in (Scheme.OVA, Scheme.PC):
        raise InvalidInputError("validation is defined for the OVA and PC schemes")
    return LossSpec(scheme, BinaryLossKind.ZERO_ONE)


def validation_score(scheme: Scheme, samples, K: int | None = None) -> float:
    """Zero-one version of the unbiased complementary risk (lower is better)."""
    return empirical_comp_risk(_zero_one(scheme), samples, K).value


def combined_validation_score(scheme: Scheme, alpha: float, ordinary, complementary,
                              K: int | None = None) -> float:
    """Zero-one version of the combined risk, each term on its own held-out set."""
    return combined_objective(alpha, ordinary, complementary, _zero_one(scheme), K,
                              include_constants=True).value


@dataclass(frozen=True)
class DiscreteJoint:
    """A joint p(x, y) supported on finitely many patterns.

    ``pattern_probs[i]`` is p(x_i) and ``class_probs[i, k]`` is p(y=k+1 | x_i).
    """

    pattern_probs: np.ndarray
    class_probs: np.ndarray
    patterns: np.ndarray | None = None

    def __post_init__(self):
        px = np.asarray(self.pattern_probs, dtype=np.float64)
        pyx = np.asarray(self.class_probs, dtype=np.float64)
        if px.ndim != 1 or pyx.ndim != 2 or pyx.shape[0] != px.shape[0]:
            raise InvalidInputError("pattern_probs must be (P,) and class_probs (P, K)")
        if pyx.shape[1] < 2:
            raise InvalidInputError("need at least two classes")
        if px.size * pyx.shape[1] > MAX_ORACLE_CELLS:
            raise InvalidInputError(f"oracle limited to {MAX_ORACLE_CELLS} (pattern, class) cells")
        if np.any(px < 0) or np.any(pyx < 0) or not (np.all(np.isfinite(px)) and np.all(np.isfinite(pyx))):
            raise InvalidInputError("probabilities must be finite and nonnegative")
        if abs(px.sum() - 1.0) > 1e-9 or np.any(np.abs(pyx.sum(axis=1) - 1.0) > 1e-9):
            raise InvalidInputError("probabilities must sum to one")
        object.__setattr__(self, "pattern_probs", px)
        object.__setattr__(self, "class_probs", pyx)

    @property
    def K(self) -> int:
        return self.class_probs.shape[1]

    @property
    def n_patterns(self) -> int:
        return self.pattern_probs.shape[0]

    def joint(self) -> np.ndarray:
        """p(x_i, y=k) as a (P, K) matrix."""
        return self.pattern_probs[:, None] * self.class_probs

    def complementary_joint(self) -> np.ndarray:
        """pbar(x_i, ybar=k) = (1/(K-1)) * sum_{y != k} p(x_i, y)."""
        p = self.joint()
        return (p.sum(axis=1, keepdims=True) - p) / (self.K - 1)

    @classmethod
    def random(cls, n_patterns: int, K: int, rng: np.random.Generator, d: int = 2) -> "DiscreteJoint":
        return cls(rng.dirichlet(np.ones(n_patterns)),
                   rng.dirichlet(np.ones(K), size=n_patterns),
                   rng.normal(size=(n_patterns, d)))

    def sample_complementary(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw n (pattern index, 1-based ybar) pairs from pbar."""
        pbar = self.complementary_joint().ravel()
        cells = rng.choice(pbar.size, size=n, p=pbar / pbar.sum())
        return cells // self.K, cells % self.K + 1


def _joint_scores(joint: DiscreteJoint, scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != (joint.n_patterns, joint.K):
        raise InvalidInputError(f"expected scores of shape {(joint.n_patterns, joint.K)}")
    return s


def _cell_losses(fn, spec: LossSpec, s: np.ndarray) -> np.ndarray:
    P, K = s.shape
    labels = np.tile(np.arange(1, K + 1), P)
    return np.asarray(fn(spec, np.repeat(s, K, axis=0), labels)).reshape(P, K)


def exact_risk(joint: DiscreteJoint, scores, spec: LossSpec) -> float:
    """sum_x sum_y p(x, y) * L(g(x), y)."""
    s = _joint_scores(joint, scores)
    return float(np.sum(joint.joint() * _cell_losses(multiclass_loss, spec, s)))


def exact_comp_risk(joint: DiscreteJoint, scores, spec: LossSpec) -> float:
    """(K-1) * E_pbar[Lbar] - M1 + M2, computed exactly."""
    s = _joint_scores(joint, scores)
    m1, m2 = loss_constants(spec.scheme, joint.K)
    expect = float(np.sum(joint.complementary_joint() * _cell_losses(comp_loss, spec, s)))
    return (joint.K - 1) * expect - m1 + m2


def exact_comp_identity_gap(joint: DiscreteJoint, scores, spec: LossSpec) -> float:
    return abs(exact_comp_risk(joint, scores, spec) - exact_risk(joint, scores, spec))
