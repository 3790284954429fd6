import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from complabel.binary_losses import BinaryLossKind as K
from complabel.comp_losses import (
    LossSpec,
    Scheme,
    baseline_loss,
    comp_loss,
    comp_loss_grad,
    complementary_objective_loss,
    loss_constants,
    multiclass_loss,
    multiclass_loss_grad,
)
from complabel.exceptions import InvalidInputError, UnsupportedGradientError

from conftest import central_diff

SYMMETRIC = [K.SIGMOID, K.RAMP, K.ZERO_ONE]
OVA_S = LossSpec(Scheme.OVA, K.SIGMOID)
PC_S = LossSpec(Scheme.PC, K.SIGMOID)


def ell_s(z):
    return 1.0 / (1.0 + math.exp(z))


def test_multiclass_examples():
    assert multiclass_loss(OVA_S, [0, 0, 0], 1) == pytest.approx(1.0, abs=1e-15)
    assert multiclass_loss(PC_S, [0, 0, 0], 2) == pytest.approx(1.0, abs=1e-15)
    assert multiclass_loss(LossSpec("pc", "zero-one"), [1, 0, -1], 1) == 0.0


def test_comp_examples():
    assert comp_loss(OVA_S, [0, 0, 0], 2) == pytest.approx(1.0, abs=1e-15)
    assert comp_loss(PC_S, [1, -1, 0], 1) == pytest.approx(1.6118556566078872, abs=1e-14)
    assert comp_loss(PC_S, [1, -1, 0], 1) == pytest.approx(ell_s(-2) + ell_s(-1), abs=1e-14)


def test_baseline_examples():
    assert baseline_loss(LossSpec("ml", "sigmoid"), [0, 0, 0], 2) == pytest.approx(1.5, abs=1e-15)
    pl = LossSpec.parse("pl")
    assert pl.kind is K.SQUARED_HINGE
    assert baseline_loss(pl, [2, 0, -2], 3) == 0.0
    assert baseline_loss(pl, [0, 0, 0], 1) == 2.0


def test_pl_requires_squared_hinge():
    with pytest.raises(InvalidInputError):
        LossSpec(Scheme.PL, K.SIGMOID)


def test_scheme_restrictions():
    with pytest.raises(InvalidInputError):
        comp_loss(LossSpec("ml", "sigmoid"), [0, 0], 1)
    with pytest.raises(InvalidInputError):
        baseline_loss(PC_S, [0, 0], 1)


@pytest.mark.parametrize("bad", [[0.0, math.nan, 1.0], [math.inf, 0.0, 0.0]])
def test_non_finite_scores(bad):
    with pytest.raises(InvalidInputError):
        comp_loss(PC_S, bad, 1)
    with pytest.raises(InvalidInputError):
        multiclass_loss(OVA_S, bad, 1)


@pytest.mark.parametrize("label", [0, 4, 1.5])
def test_label_range(label):
    with pytest.raises(InvalidInputError):
        comp_loss(PC_S, [0.0, 0.0, 0.0], label)


def test_constants():
    assert loss_constants(Scheme.OVA, 5) == (5, 2)
    assert loss_constants(Scheme.PC, 4) == (6, 3)
    assert loss_constants("pc", 2) == (1, 1)
    with pytest.raises(InvalidInputError):
        loss_constants(Scheme.OVA, 1)
    with pytest.raises(InvalidInputError):
        loss_constants(Scheme.ML, 3)


def test_batched_matches_single(rng):
    g = rng.normal(size=(20, 4))
    ybar = rng.integers(1, 5, size=20)
    for spec in (OVA_S, PC_S):
        batch = comp_loss(spec, g, ybar)
        assert batch.shape == (20,)
        np.testing.assert_array_equal(batch, [comp_loss(spec, gi, yi) for gi, yi in zip(g, ybar)])


def test_grad_examples():
    np.testing.assert_allclose(comp_loss_grad(PC_S, [0, 0, 0], 1), [0.5, -0.25, -0.25], atol=1e-15)
    np.testing.assert_allclose(comp_loss_grad(OVA_S, [0, 0, 0], 2), [-0.125, 0.25, -0.125], atol=1e-15)
    with pytest.raises(UnsupportedGradientError):
        comp_loss_grad(LossSpec("pc", "zero-one"), [0, 0, 0], 1)


def _away_from_kinks(spec, g, ybar):
    """True when every argument fed to the ramp loss is > 1e-3 from +-1."""
    g = np.asarray(g)
    K_ = g.size
    j = ybar - 1
    others = [i for i in range(K_) if i != j]
    if spec.scheme is Scheme.PC:
        args = [g[i] - g[j] for i in others]
    else:
        args = [g[i] for i in others] + [-g[j]]
    return all(abs(abs(a) - 1.0) > 1e-3 for a in args)


@pytest.mark.parametrize("scheme,kind", [(s, k) for s in ("ova", "pc", "ml") for k in ("sigmoid", "ramp")]
                         + [("pl", "squared-hinge")])
def test_comp_grad_finite_difference(scheme, kind, rng):
    spec = LossSpec.parse(scheme, kind)
    checked = 0
    while checked < 40:
        Kc = int(rng.integers(2, 9))
        g = rng.normal(scale=2.0, size=Kc)
        ybar = int(rng.integers(1, Kc + 1))
        if spec.kind is K.RAMP and not _away_from_kinks(spec, g, ybar):
            continue
        num = central_diff(lambda s: complementary_objective_loss(spec, s, ybar), g)
        ana = comp_loss_grad(spec, g, ybar)
        scale = max(np.abs(num).max(), 1e-8)
        assert np.abs(ana - num).max() / scale < 1e-5
        checked += 1


@pytest.mark.parametrize("scheme", ["ova", "pc"])
def test_multiclass_grad_finite_difference(scheme, rng):
    spec = LossSpec.parse(scheme, "sigmoid")
    for _ in range(30):
        Kc = int(rng.integers(2, 9))
        g = rng.normal(scale=2.0, size=Kc)
        y = int(rng.integers(1, Kc + 1))
        num = central_diff(lambda s: multiclass_loss(spec, s, y), g)
        np.testing.assert_allclose(multiclass_loss_grad(spec, g, y), num, rtol=1e-5, atol=1e-9)


@pytest.mark.parametrize("scheme,kind", list(product([Scheme.OVA, Scheme.PC], SYMMETRIC)))
def test_constants_check_sum_and_pair(scheme, kind, rng):
    spec = LossSpec(scheme, kind)
    for Kc in range(2, 11):
        m1, m2 = loss_constants(scheme, Kc)
        g = rng.normal(scale=3.0, size=(1000, Kc))
        total = sum(comp_loss(spec, g, k) for k in range(1, Kc + 1))
        assert np.abs(total - m1).max() < 1e-9
        y = rng.integers(1, Kc + 1, size=1000)
        assert np.abs(comp_loss(spec, g, y) + multiclass_loss(spec, g, y) - m2).max() < 1e-9


def test_squared_hinge_breaks_constants_check(rng):
    spec = LossSpec(Scheme.PC, K.SQUARED_HINGE)
    g = rng.normal(size=(50, 3))
    total = sum(comp_loss(spec, g, k) for k in range(1, 4))
    assert np.abs(total - 3.0).max() > 0.1


scores3 = arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=200)
@given(g=scores3, c=st.floats(-100, 100), ybar=st.integers(1, 3))
def test_pc_translation_invariance(g, c, ybar):
    assert comp_loss(PC_S, g + c, ybar) == pytest.approx(comp_loss(PC_S, g, ybar), abs=1e-12)
    assert abs(comp_loss_grad(PC_S, g, ybar).sum()) < 1e-10


@pytest.mark.parametrize("scheme,kind", list(product([Scheme.OVA, Scheme.PC], SYMMETRIC)))
def test_binary_reduction(scheme, kind, rng):
    spec = LossSpec(scheme, kind)
    g = rng.normal(scale=2.0, size=(200, 2))
    for ybar in (1, 2):
        np.testing.assert_allclose(comp_loss(spec, g, ybar), multiclass_loss(spec, g, 3 - ybar), rtol=0, atol=1e-15)
