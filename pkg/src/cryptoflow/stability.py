"""Linearization at the flat equilibrium and spectral classification.

The Jacobian of each variant at P = Pa = L = 1, zeta1 = zeta2 = 0 has a
closed form; a finite-difference Jacobian is provided as an independent
cross-check.  Characteristic polynomials are computed by the
Faddeev--LeVerrier trace recursion rather than from eigenvalues, so the
closed-form route and the eigensolver route stay independent of each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import ConvergenceFailure, ResidualTooLarge, UnsupportedScaling
from .model import ModelParams, ModelVariant, Variant, equilibrium, rhs

DEFAULT_EPS = 1e-8

# Central-difference step bounds: below, roundoff dominates; above, truncation.
NUMERIC_H_MIN = 1e-8
NUMERIC_H_MAX = 1e-4
NUMERIC_H_DEFAULT = 1e-6


class Verdict(str, Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"
    INVALID = "invalid"


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with coefficients stored leading-first."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("polynomial needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: complex) -> complex:
        acc = 0.0 + 0.0j if isinstance(x, complex) else 0.0
        for c in self.coeffs:
            acc = acc * x + c
        return acc


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending real part, then ascending imaginary."""

    eigenvalues: tuple[complex, ...]

    @property
    def max_real(self) -> float:
        return self.eigenvalues[0].real


@dataclass(frozen=True)
class StabilityVerdict:
    tag: Verdict
    oscillatory: bool
    max_real: float
    eps: float


def jacobian_analytic(variant: ModelVariant, params: ModelParams) -> np.ndarray:
    """Closed-form Jacobian at the flat equilibrium.

    The full variant is only supported with equal reaction time scales
    c = c1 = c2 (the scaling under which its closed form is derived);
    unequal scales raise UnsupportedScaling.  The smaller variants accept
    general time scales.
    """
    q, q1, q2 = params.q, params.q1, params.q2
    tau0, c, c1 = params.tau0, params.c, params.c1

    if variant.tag is Variant.LIQUIDITY_2X2:
        return np.array([
            [-1.0 / tau0, 1.0 / tau0],
            [-q / c, (q - 1.0) / c],
        ])

    if variant.tag is Variant.SENTIMENT_3X3:
        return np.array([
            [-1.0 / tau0, 1.0 / tau0, 2.0 / tau0],
            [-q / c, (q - 1.0) / c, 2.0 * q / c],
            [-q1 / c1, q1 / c1, (2.0 * q1 - 1.0) / c1],
        ])

    if not (params.c == params.c1 == params.c2):
        raise UnsupportedScaling(
            "full variant Jacobian requires c = c1 = c2, got "
            f"c={params.c}, c1={params.c1}, c2={params.c2}"
        )
    c2s = params.c2
    c3 = params.c3
    return np.array([
        [-1.0 / tau0, 0.0, 1.0 / tau0, 2.0 / tau0, 2.0 / tau0],
        [1.0 / c3, -1.0 / c3, 0.0, 0.0, 0.0],
        [-q / c, 0.0, (q - 1.0) / c, 2.0 * q / c, 2.0 * q / c],
        [-q1 / c1, 0.0, q1 / c1, (2.0 * q1 - 1.0) / c1, 2.0 * q1 / c1],
        [-q2 / c2s, q2 / c2s, 0.0, 0.0, -1.0 / c2s],
    ])


def jacobian_numeric(
    variant: ModelVariant,
    params: ModelParams,
    h: float = NUMERIC_H_DEFAULT,
) -> np.ndarray:
    """Central-difference Jacobian of the right-hand side at equilibrium."""
    if not NUMERIC_H_MIN <= h <= NUMERIC_H_MAX:
        raise ValueError(
            f"step h must lie in [{NUMERIC_H_MIN}, {NUMERIC_H_MAX}], got {h}"
        )
    x0 = equilibrium(variant)
    n = variant.dim
    jac = np.empty((n, n))
    for j in range(n):
        plus = x0.copy()
        minus = x0.copy()
        plus[j] += h
        minus[j] -= h
        jac[:, j] = (rhs(variant, params, plus) - rhs(variant, params, minus)) / (2.0 * h)
    return jac


def char_poly(m: np.ndarray) -> Polynomial:
    """Monic characteristic polynomial det(lambda*I - m), leading-first.

    Uses the Faddeev--LeVerrier recursion
        M_1 = I,  c_k = -tr(m M_k)/k,  M_{k+1} = m M_k + c_k I,
    which needs only matrix products and traces, no eigensolver.  The
    recursion runs in exact integer arithmetic (every float entry is a
    dyadic rational, so scaling by a common power of two makes the matrix
    integral and keeps the recursion integral), because the float version
    loses digits to trace cancellation on badly scaled matrices.  Each
    returned coefficient is the exact value correctly rounded once.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    n = m.shape[0]
    fracs = [Fraction(x) for x in m.ravel().tolist()]
    scale = max(f.denominator for f in fracs)
    a = [[int(fracs[i * n + j] * scale) for j in range(n)] for i in range(n)]
    mk = [[int(i == j) for j in range(n)] for i in range(n)]
    coeffs = [1.0]
    for k in range(1, n + 1):
        am = [
            [sum(a[i][l] * mk[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
        # trace of an integer FL iterate is always divisible by k
        ck = -sum(am[i][i] for i in range(n)) // k
        coeffs.append(float(Fraction(ck, scale**k)))
        for i in range(n):
            am[i][i] += ck
        mk = am
    return Polynomial(tuple(coeffs))


def eigenvalues(m: np.ndarray) -> Spectrum:
    """Eigenvalues of a real square matrix, deterministically ordered."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    ordered = sorted((complex(v) for v in vals), key=lambda z: (-z.real, z.imag))
    return Spectrum(tuple(ordered))


def _deflate_at_minus_one(coeffs: tuple[float, ...]) -> tuple[tuple[float, ...], float]:
    """Synthetic division by (lambda + 1); returns quotient and remainder."""
    quot = [coeffs[0]]
    for a in coeffs[1:-1]:
        quot.append(a - quot[-1])
    rem = coeffs[-1] - quot[-1]
    return tuple(quot), rem


def reduced_cubic(params: ModelParams, residual_tol: float = 1e-8) -> Polynomial:
    """Cubic factor of the full-variant characteristic polynomial.

    Under the c = c1 = c2 = 1 scaling the 5x5 spectrum carries a double
    eigenvalue at -1; dividing the characteristic polynomial by
    (lambda + 1)^2 leaves a monic cubic holding the nontrivial dynamics.
    A division remainder above ``residual_tol`` signals that the scaling
    assumption is violated and raises ResidualTooLarge.
    """
    from .model import FULL_5X5

    p5 = char_poly(jacobian_analytic(FULL_5X5, params))
    quot1, rem1 = _deflate_at_minus_one(p5.coeffs)
    quot2, rem2 = _deflate_at_minus_one(quot1)
    if max(abs(rem1), abs(rem2)) > residual_tol:
        raise ResidualTooLarge(
            "remainder after dividing by (lambda + 1)^2 is "
            f"{max(abs(rem1), abs(rem2)):.3g} > {residual_tol:.3g}; "
            "the c = c1 = c2 = 1 scaling does not hold"
        )
    return Polynomial(quot2)


def classify(spectrum: Spectrum, eps: float = DEFAULT_EPS) -> StabilityVerdict:
    """Spectral verdict from the dominant real part.

    Stable if max Re < -eps, Unstable if > eps, Marginal inside the band.
    The verdict is oscillatory when an eigenvalue attaining the dominant
    real part (within eps) has |Im| > eps.
    """
    mr = spectrum.max_real
    if mr < -eps:
        tag = Verdict.STABLE
    elif mr > eps:
        tag = Verdict.UNSTABLE
    else:
        tag = Verdict.MARGINAL
    oscillatory = any(
        abs(z.real - mr) <= eps and abs(z.imag) > eps for z in spectrum.eigenvalues
    )
    return StabilityVerdict(tag=tag, oscillatory=oscillatory, max_real=mr, eps=eps)
