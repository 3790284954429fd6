"""Self-contained invariant suite behind the ``check`` subcommand."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .binary_losses import BinaryLossKind, check_symmetry, loss_value
from .comp_losses import (
    LossSpec,
    Scheme,
    comp_loss,
    comp_loss_grad,
    complementary_objective_loss,
    loss_constants,
    multiclass_loss,
)
from .models import Batch, LinearModel, MlpModel, objective_and_gradient
from .risk import DiscreteJoint, exact_comp_identity_gap
from .theory import BoundInputs, estimation_error_bound, uniform_deviation_bound

SYMMETRIC = (BinaryLossKind.SIGMOID, BinaryLossKind.RAMP)
SCHEMES = (Scheme.OVA, Scheme.PC)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _symmetry(rng, constants):
    grid = np.linspace(-5, 5, 100001)
    worst = max(check_symmetry(k, grid) for k in SYMMETRIC)
    nonzero = grid[grid != 0]
    zo = check_symmetry(BinaryLossKind.ZERO_ONE, nonzero)
    at_zero = loss_value("zero-one", 0.0) + loss_value("zero-one", -0.0) - 1.0
    return worst < 1e-12 and zo == 0.0 and at_zero == 1.0, f"max dev {worst:.2e}; zero-one at 0: {at_zero:+.0f}"


def _constants_check(rng, constants, which: str, n_vectors: int = 1000):
    worst = 0.0
    for K in range(2, 11):
        g = rng.normal(scale=3.0, size=(n_vectors, K))
        for scheme in SCHEMES:
            m1, m2 = constants(scheme, K)
            for kind in SYMMETRIC + (BinaryLossKind.ZERO_ONE,):
                spec = LossSpec(scheme, kind)
                if which == "sum":
                    total = sum(comp_loss(spec, g, k) for k in range(1, K + 1))
                    worst = max(worst, float(np.max(np.abs(total - m1))))
                else:
                    y = rng.integers(1, K + 1, size=n_vectors)
                    pair = comp_loss(spec, g, y) + multiclass_loss(spec, g, y)
                    worst = max(worst, float(np.max(np.abs(pair - m2))))
    return worst < 1e-9, f"max residual {worst:.2e}"


def _identity_check(rng, constants, n_joints: int = 100):
    worst = 0.0
    for _ in range(n_joints):
        for K in range(2, 7):
            joint = DiscreteJoint.random(int(rng.integers(1, 8)), K, rng)
            scores = rng.normal(scale=2.0, size=(joint.n_patterns, K))
            for scheme in SCHEMES:
                for kind in SYMMETRIC + (BinaryLossKind.ZERO_ONE,):
                    worst = max(worst, exact_comp_identity_gap(joint, scores, LossSpec(scheme, kind)))
    return worst < 1e-12, f"max gap {worst:.2e}"


def _fd_grad(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _rel_err(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-8))


def _grad_comp_loss(rng, constants):
    worst = 0.0
    for scheme in (Scheme.OVA, Scheme.PC, Scheme.ML):
        spec = LossSpec(scheme, BinaryLossKind.SIGMOID)
        for K in (2, 3, 5, 8):
            for _ in range(20):
                g = rng.normal(scale=2.0, size=K)
                ybar = int(rng.integers(1, K + 1))
                num = _fd_grad(lambda s: complementary_objective_loss(spec, s, ybar), g)
                worst = max(worst, _rel_err(comp_loss_grad(spec, g, ybar), num))
    return worst < 1e-5, f"max rel err {worst:.2e}"


def _grad_objective(rng, constants):
    worst = 0.0
    K, d = 3, 4
    for cls in (LinearModel, MlpModel):
        for scheme in SCHEMES:
            for alpha in (0.0, 0.5, 1.0):
                model = cls.init(K, d, rng)
                if cls is MlpModel:
                    model = model.with_flat(model.flatten() + rng.normal(scale=0.3, size=model.n_params))
                batch = Batch(rng.normal(size=(7, d)), rng.integers(1, K + 1, size=7),
                              rng.normal(size=(9, d)), rng.integers(1, K + 1, size=9))
                spec = LossSpec(scheme, BinaryLossKind.SIGMOID)
                p0 = model.flatten()
                analytic = objective_and_gradient(model, batch, spec, alpha, 0.01)[1]
                coords = rng.choice(p0.size, size=min(20, p0.size), replace=False)
                h = 1e-6
                for i in coords:
                    e = np.zeros_like(p0)
                    e[i] = h
                    fp = objective_and_gradient(model.with_flat(p0 + e), batch, spec, alpha, 0.01)[0]
                    fm = objective_and_gradient(model.with_flat(p0 - e), batch, spec, alpha, 0.01)[0]
                    num = (fp - fm) / (2 * h)
                    err = abs(analytic[i] - num) / max(abs(num), 1e-6)
                    worst = max(worst, err)
    return worst < 1e-4, f"max rel err {worst:.2e}"


def _bound_factor_two(rng, constants):
    worst = 0.0
    for _ in range(200):
        b = BoundInputs(int(rng.integers(2, 20)), float(rng.uniform(0.01, 2)), float(rng.uniform(0.001, 0.999)),
                        int(rng.integers(1, 10**6)), rademacher=float(rng.uniform(0, 1)))
        for scheme in SCHEMES:
            u = uniform_deviation_bound(scheme, b)
            worst = max(worst, abs(estimation_error_bound(scheme, b) - 2 * u) / u)
    return worst < 1e-12, f"max rel diff {worst:.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("symmetry", _symmetry),
    ("constants-sum", lambda rng, c: _constants_check(rng, c, "sum")),
    ("constants-pair", lambda rng, c: _constants_check(rng, c, "pair")),
    ("risk-identity", _identity_check),
    ("grad-comp-loss", _grad_comp_loss),
    ("grad-objective", _grad_objective),
    ("bound-factor-two", _bound_factor_two),
]


def run_checks(seed: int = 0, constants=loss_constants) -> list[CheckResult]:
    """Run every invariant; ``constants`` can be swapped to exercise failure reporting."""
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng, constants)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return out


def run_check(seed: int = 0, constants=loss_constants, stream=None) -> int:
    """Print one line per property plus totals; return the process exit status."""
    import sys

    stream = stream or sys.stdout
    results = run_checks(seed, constants)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail} ({r.seconds:.2f}s)", file=stream)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results)} properties run, {len(results) - len(failed)} passed, {len(failed)} failed", file=stream)
    if failed:
        print("failing: " + ", ".join(failed), file=stream)
    return 1 if failed else 0
