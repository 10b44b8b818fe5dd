"""Geometric Brownian motion baseline and normal tail arithmetic.

The baseline prices an asset with independent log-normal returns, the model
the asset-flow dynamics are measured against.  Paths are generated by exact
log-space stepping, so no discretization error enters; normal variates come
from a deterministic inverse-CDF transform of seeded PCG64 uniforms (no
rejection sampling), which keeps every path reproducible from its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri


@dataclass(frozen=True)
class GbmParams:
    """Drift mu and volatility sigma per unit time, step dt, n steps."""

    mu: float = 0.0
    sigma: float = 0.0075
    dt: float = 1.0
    n: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


def _standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    # (k + 0.5) / 2^53 keeps uniforms strictly inside (0, 1) so the
    # inverse CDF never sees an endpoint.
    u = (rng.integers(0, 1 << 53, size=n, dtype=np.uint64) + 0.5) / float(1 << 53)
    return ndtri(u)


def gbm_simulate(params: GbmParams, p0: float = 1.0) -> np.ndarray:
    """Price path of length n+1 with exact log-normal increments.

    log P advances by (mu - sigma^2/2) dt + sigma sqrt(dt) Z per step with
    independent standard normal Z, so each step is distributed exactly and
    the path stays positive for any step size.
    """
    if not p0 > 0.0:
        raise ValueError(f"p0 must be positive, got {p0}")
    rng = np.random.default_rng(params.seed)
    z = _standard_normals(rng, params.n)
    increments = (params.mu - 0.5 * params.sigma**2) * params.dt \
        + params.sigma * math.sqrt(params.dt) * z
    log_path = math.log(p0) + np.concatenate(([0.0], np.cumsum(increments)))
    return np.exp(log_path)


def gbm_path_csv(params: GbmParams, path: np.ndarray) -> str:
    """CSV with time and price columns, 17 significant digits."""
    lines = ["t,P"]
    for i, p in enumerate(path):
        lines.append(f"{i * params.dt:.17g},{p:.17g}")
    return "\n".join(lines) + "\n"


def normal_tail(k: float) -> float:
    """Upper-tail probability that a standard normal falls below -k.

    Evaluated as erfc(k/sqrt(2))/2, which keeps full relative accuracy deep
    into the tail where 1 - Phi(k) would cancel catastrophically.
    """
    return 0.5 * math.erfc(k / math.sqrt(2.0))


@dataclass(frozen=True)
class ExceedanceReport:
    """How improbable a one-step drop is under the log-normal baseline."""

    sigma_daily: float
    drop: float
    k: float
    probability: float
    recurrence_days: float


def exceedance_report(sigma_daily: float, drop: float) -> ExceedanceReport:
    """Tail probability and mean recurrence time of a drop of given size.

    k = drop/sigma_daily is the move in daily standard deviations; the
    recurrence time is the reciprocal probability in days.
    """
    if not sigma_daily > 0.0:
        raise ValueError(f"sigma_daily must be positive, got {sigma_daily}")
    if not drop > 0.0:
        raise ValueError(f"drop must be positive, got {drop}")
    k = drop / sigma_daily
    probability = normal_tail(k)
    recurrence = math.inf if probability == 0.0 else 1.0 / probability
    return ExceedanceReport(
        sigma_daily=sigma_daily,
        drop=drop,
        k=k,
        probability=probability,
        recurrence_days=recurrence,
    )
