"""Asset-flow model of a speculatively traded asset in nondimensional units.

The state couples the trading price P to a finite liquidity pool L and two
sentiment variables: zeta1 follows the recent price trend, zeta2 the discount
of the price against an anchored (slowly adjusting) price Pa.  All prices are
measured in units of the equilibrium liquidity value, so the flat equilibrium
is P = Pa = L = 1, zeta1 = zeta2 = 0.

Three nested variants are exposed:

* ``FULL_5X5``      -- (P, Pa, L, zeta1, zeta2), the complete model
* ``SENTIMENT_3X3`` -- (P, L, zeta1), value sentiment switched off
* ``LIQUIDITY_2X2`` -- (P, L), pure price/liquidity relaxation

With S = 1 + 2*zeta1 + 2*zeta2 the full system reads

    P'     = (S*L - P) / tau0
    Pa'    = (P - Pa) / c3
    L'     = (1 - L + q*(S*L - P)) / c
    zeta1' = (q1*(S*L/P - 1) - zeta1) / c1
    zeta2' = (q2*(Pa - P)/D - zeta2) / c2

where the discount denominator D is the anchored price Pa by default; an
alternative normalization D = P is selectable on the variant.  The smaller
variants drop the corresponding rows and freeze the dropped sentiments at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NegativeAmplitude, NonPositiveTimeScale, StateOutOfDomain

# Prices below this floor are treated as a domain exit, not clamped.
P_FLOOR = 1e-9


class Variant(str, Enum):
    """Which subset of the state is dynamic."""

    FULL_5X5 = "full5x5"
    SENTIMENT_3X3 = "sentiment3x3"
    LIQUIDITY_2X2 = "liquidity2x2"


class Zeta2Denominator(str, Enum):
    """Normalization of the value-sentiment discount (Pa - P)/D."""

    ANCHOR_PA = "anchor_pa"
    PRICE_P = "price_p"


_LABELS = {
    Variant.FULL_5X5: ("P", "Pa", "L", "zeta1", "zeta2"),
    Variant.SENTIMENT_3X3: ("P", "L", "zeta1"),
    Variant.LIQUIDITY_2X2: ("P", "L"),
}

_IGNORED = {
    Variant.FULL_5X5: frozenset(),
    Variant.SENTIMENT_3X3: frozenset({"q2", "c2", "c3"}),
    Variant.LIQUIDITY_2X2: frozenset({"q1", "q2", "c1", "c2", "c3"}),
}


@dataclass(frozen=True)
class ModelVariant:
    """A model variant together with its discount normalization."""

    tag: Variant
    zeta2_denominator: Zeta2Denominator = Zeta2Denominator.ANCHOR_PA

    @property
    def dim(self) -> int:
        return len(_LABELS[self.tag])

    @property
    def labels(self) -> tuple[str, ...]:
        """State component names, in storage order."""
        return _LABELS[self.tag]


FULL_5X5 = ModelVariant(Variant.FULL_5X5)
FULL_5X5_PRICE_NORM = ModelVariant(Variant.FULL_5X5, Zeta2Denominator.PRICE_P)
SENTIMENT_3X3 = ModelVariant(Variant.SENTIMENT_3X3)
LIQUIDITY_2X2 = ModelVariant(Variant.LIQUIDITY_2X2)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: reaction amplitudes and time scales.

    q, q1, q2 are the liquidity, trend and value reaction amplitudes;
    tau0, c, c1, c2, c3 are the price, liquidity, trend, value and anchor
    time scales.  Defaults match the command-line defaults.
    """

    q: float = 0.5
    q1: float = 0.5
    q2: float = 0.5
    tau0: float = 0.1
    c: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 10.0

    @property
    def K(self) -> float:
        """Combined feedback strength q + 2*q1."""
        return self.q + 2.0 * self.q1

    @property
    def Q(self) -> float:
        """Stability surplus 1 - K."""
        return 1.0 - self.K


def ignored_fields(variant: ModelVariant) -> frozenset[str]:
    """Parameter fields the given variant does not read."""
    return _IGNORED[variant.tag]


def validate_params(params: ModelParams, variant: ModelVariant) -> ModelParams:
    """Check parameter constraints and return the params unchanged.

    All fields are validated, including ones the variant ignores; use
    :func:`ignored_fields` to see which fields those are.

    Raises:
        NonPositiveTimeScale: a time scale is zero or negative.
        NegativeAmplitude: a reaction amplitude is negative.
    """
    for name in ("tau0", "c", "c1", "c2", "c3"):
        value = getattr(params, name)
        if not value > 0.0:
            raise NonPositiveTimeScale(f"{name} must be positive, got {value}")
    for name in ("q", "q1", "q2"):
        value = getattr(params, name)
        if value < 0.0:
            raise NegativeAmplitude(f"{name} must be nonnegative, got {value}")
    return params


def equilibrium(variant: ModelVariant) -> np.ndarray:
    """Flat equilibrium state: all prices 1, all sentiments 0."""
    full = {"P": 1.0, "Pa": 1.0, "L": 1.0, "zeta1": 0.0, "zeta2": 0.0}
    return np.array([full[name] for name in variant.labels])


def _check_domain(variant: ModelVariant, state: np.ndarray) -> None:
    if state[0] < P_FLOOR:
        raise StateOutOfDomain(f"P = {state[0]} below floor {P_FLOOR}")
    if variant.tag is Variant.FULL_5X5 and state[1] < P_FLOOR:
        raise StateOutOfDomain(f"Pa = {state[1]} below floor {P_FLOOR}")


def rhs(variant: ModelVariant, params: ModelParams, state: np.ndarray) -> np.ndarray:
    """Time derivative of the state.

    Parameters are assumed valid (see :func:`validate_params`); the state is
    checked against the price floor and rejected with StateOutOfDomain rather
    than clamped.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (variant.dim,):
        raise ValueError(
            f"state must have shape ({variant.dim},) for {variant.tag.value}, "
            f"got {state.shape}"
        )
    _check_domain(variant, state)

    if variant.tag is Variant.LIQUIDITY_2X2:
        p, liq = state
        excess = liq - p
        return np.array([excess / params.tau0,
                         (1.0 - liq + params.q * excess) / params.c])

    if variant.tag is Variant.SENTIMENT_3X3:
        p, liq, z1 = state
        s = 1.0 + 2.0 * z1
        excess = s * liq - p
        return np.array([
            excess / params.tau0,
            (1.0 - liq + params.q * excess) / params.c,
            (params.q1 * (s * liq / p - 1.0) - z1) / params.c1,
        ])

    p, pa, liq, z1, z2 = state
    s = 1.0 + 2.0 * z1 + 2.0 * z2
    excess = s * liq - p
    if variant.zeta2_denominator is Zeta2Denominator.ANCHOR_PA:
        discount = (pa - p) / pa
    else:
        discount = (pa - p) / p
    return np.array([
        excess / params.tau0,
        (p - pa) / params.c3,
        (1.0 - liq + params.q * excess) / params.c,
        (params.q1 * (s * liq / p - 1.0) - z1) / params.c1,
        (params.q2 * discount - z2) / params.c2,
    ])
