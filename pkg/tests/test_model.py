"""Model definitions: variants, parameter validation, and the vector field."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryptoflow import (
    FULL_5X5,
    FULL_5X5_PRICE_NORM,
    LIQUIDITY_2X2,
    SENTIMENT_3X3,
    ModelParams,
    NegativeAmplitude,
    NonPositiveTimeScale,
    StateOutOfDomain,
    equilibrium,
    ignored_fields,
    rhs,
    validate_params,
)

ALL_VARIANTS = (FULL_5X5, SENTIMENT_3X3, LIQUIDITY_2X2)

fields = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


def params_strategy():
    return st.builds(
        ModelParams,
        q=fields, q1=fields, q2=fields,
        tau0=fields, c=fields, c1=fields, c2=fields, c3=fields,
    )


def test_variant_shapes():
    assert FULL_5X5.dim == 5
    assert SENTIMENT_3X3.dim == 3
    assert LIQUIDITY_2X2.dim == 2
    assert FULL_5X5.labels == ("P", "Pa", "L", "zeta1", "zeta2")
    assert SENTIMENT_3X3.labels == ("P", "L", "zeta1")
    assert LIQUIDITY_2X2.labels == ("P", "L")


def test_ignored_fields():
    assert ignored_fields(FULL_5X5) == frozenset()
    assert ignored_fields(SENTIMENT_3X3) == {"q2", "c2", "c3"}
    assert ignored_fields(LIQUIDITY_2X2) == {"q1", "q2", "c1", "c2", "c3"}


def test_equilibrium_values():
    np.testing.assert_array_equal(equilibrium(FULL_5X5), [1, 1, 1, 0, 0])
    np.testing.assert_array_equal(equilibrium(SENTIMENT_3X3), [1, 1, 0])
    np.testing.assert_array_equal(equilibrium(LIQUIDITY_2X2), [1, 1])


def test_k_and_q():
    p = ModelParams(q=0.5, q1=0.75)
    assert p.K == 2.0
    assert p.Q == -1.0


@pytest.mark.parametrize("name", ["tau0", "c", "c1", "c2", "c3"])
@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_time_scale_rejected(name, bad):
    params = ModelParams(**{name: bad})
    with pytest.raises(NonPositiveTimeScale):
        validate_params(params, FULL_5X5)


@pytest.mark.parametrize("name", ["q", "q1", "q2"])
def test_negative_amplitude_rejected(name):
    params = ModelParams(**{name: -0.1})
    with pytest.raises(NegativeAmplitude):
        validate_params(params, FULL_5X5)


def test_validation_covers_ignored_fields():
    # the 2x2 variant never reads c3, but a bad c3 is still an error
    with pytest.raises(NonPositiveTimeScale):
        validate_params(ModelParams(c3=-1.0), LIQUIDITY_2X2)


def test_validate_returns_params():
    p = ModelParams()
    assert validate_params(p, SENTIMENT_3X3) is p


@settings(max_examples=100, deadline=None)
@given(params=params_strategy())
def test_rhs_vanishes_at_equilibrium(params):
    for variant in ALL_VARIANTS:
        out = rhs(variant, params, equilibrium(variant))
        assert np.max(np.abs(out)) <= 1e-14


def test_rhs_example_liquidity():
    p = ModelParams(q=0.0, tau0=1.0, c=1.0)
    out = rhs(LIQUIDITY_2X2, p, np.array([2.0, 1.0]))
    np.testing.assert_allclose(out, [-1.0, 0.0], atol=1e-15)


def test_rhs_example_value_sentiment():
    # discount (Pa - P)/Pa = -0.1 feeds zeta2 directly at c2 = 1
    p = ModelParams(q=0.5, q1=0.5, q2=1.0, tau0=0.1, c=1.0, c1=1.0, c2=1.0, c3=10.0)
    state = np.array([1.1, 1.0, 1.0, 0.0, 0.0])
    out = rhs(FULL_5X5, p, state)
    assert out[4] == pytest.approx(-0.1, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(
    params=params_strategy(),
    p=st.floats(min_value=0.5, max_value=2.0),
    liq=st.floats(min_value=0.5, max_value=2.0),
    z1=st.floats(min_value=-0.3, max_value=0.3),
    z2=st.floats(min_value=-0.3, max_value=0.3),
)
def test_denominator_variants_agree_when_anchored_at_price(params, p, liq, z1, z2):
    state = np.array([p, p, liq, z1, z2])
    a = rhs(FULL_5X5, params, state)
    b = rhs(FULL_5X5_PRICE_NORM, params, state)
    np.testing.assert_array_equal(a, b)


def test_denominator_variants_differ_otherwise():
    params = ModelParams(q2=1.0)
    state = np.array([1.1, 1.0, 1.0, 0.0, 0.0])
    a = rhs(FULL_5X5, params, state)
    b = rhs(FULL_5X5_PRICE_NORM, params, state)
    assert a[4] != b[4]


@settings(max_examples=100, deadline=None)
@given(
    params=params_strategy(),
    s=st.floats(min_value=1e-2, max_value=1e2),
    p=st.floats(min_value=0.5, max_value=2.0),
    liq=st.floats(min_value=0.5, max_value=2.0),
    z1=st.floats(min_value=-0.3, max_value=0.3),
)
def test_time_scale_homogeneity(params, s, p, liq, z1):
    # stretching every clock by s slows the flow by exactly 1/s
    slow = ModelParams(
        q=params.q, q1=params.q1, q2=params.q2,
        tau0=s * params.tau0, c=s * params.c, c1=s * params.c1,
        c2=s * params.c2, c3=s * params.c3,
    )
    state = np.array([p, liq, z1])
    fast = rhs(SENTIMENT_3X3, params, state)
    np.testing.assert_allclose(rhs(SENTIMENT_3X3, slow, state), fast / s,
                               rtol=1e-12, atol=1e-15)


def test_price_floor_is_an_error_not_a_clamp():
    params = ModelParams()
    with pytest.raises(StateOutOfDomain):
        rhs(LIQUIDITY_2X2, params, np.array([1e-10, 1.0]))
    with pytest.raises(StateOutOfDomain):
        rhs(FULL_5X5, params, np.array([1.0, 1e-10, 1.0, 0.0, 0.0]))


def test_anchor_floor_only_checked_where_it_exists():
    # the 3x3 state has no anchored price, so only P is floored
    params = ModelParams()
    out = rhs(SENTIMENT_3X3, params, np.array([0.5, 1.0, 0.0]))
    assert np.all(np.isfinite(out))


def test_rhs_rejects_wrong_shape():
    with pytest.raises(ValueError):
        rhs(SENTIMENT_3X3, ModelParams(), np.array([1.0, 1.0]))
