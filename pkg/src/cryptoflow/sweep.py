"""Two-parameter stability sweeps and their serialized maps.

A sweep evaluates a verdict on an inclusive rectangular lattice, either from
eigenvalues of the closed-form Jacobian or from the variant's closed-form
criterion.  Cells that cannot be evaluated (invalid parameters, criterion out
of scope) become Invalid cells instead of aborting the sweep.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum

import numpy as np

from . import __version__
from .criteria import (
    DEFAULT_BAND,
    criterion_2x2,
    criterion_3x3,
    rh_5x5,
)
from .errors import CryptoflowError
from .model import (
    ModelParams,
    ModelVariant,
    Variant,
    Zeta2Denominator,
    validate_params,
)
from .stability import (
    DEFAULT_EPS,
    Verdict,
    classify,
    eigenvalues,
    jacobian_analytic,
)

AXIS_NAMES = ("q", "q1", "q2", "K", "tau0", "c3", "c_over_tau0")


class Method(str, Enum):
    EIGEN = "eigen"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class Axis:
    """An inclusive lattice over one swept quantity.

    Besides raw parameter fields, two derived axes are supported: K sweeps
    q at held q1 (q = K - 2*q1), and c_over_tau0 sweeps c at held tau0.
    """

    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        if not self.min < self.max:
            raise ValueError(f"axis {self.name}: min {self.min} must be < max {self.max}")
        if self.steps < 2:
            raise ValueError(f"axis {self.name}: steps must be >= 2, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    variant: ModelVariant
    fixed: ModelParams
    axis1: Axis
    axis2: Axis
    method: Method

    def __post_init__(self):
        if self.axis1.name == self.axis2.name:
            raise ValueError(f"axes must differ, both are {self.axis1.name!r}")


class _InvalidCell(CryptoflowError):
    """Internal: cell cannot be evaluated; message becomes the flag."""


def _apply_axis(params: ModelParams, fixed: ModelParams,
                variant: ModelVariant, name: str, value: float) -> ModelParams:
    if name == "K":
        # K sweeps q while q1 is held at its fixed value.
        q = value - 2.0 * fixed.q1
        if q < 0.0:
            raise _InvalidCell("q_negative_from_K")
        return replace(params, q=q)
    if name == "c_over_tau0":
        # The ratio sweeps c while tau0 is held at its fixed value; the
        # reaction scales tied to c by the variant's scope move with it.
        c = value * fixed.tau0
        if variant.tag is Variant.LIQUIDITY_2X2:
            return replace(params, c=c)
        if variant.tag is Variant.SENTIMENT_3X3:
            return replace(params, c=c, c1=c)
        return replace(params, c=c, c1=c, c2=c)
    return replace(params, **{name: value})


def _evaluate_cell(spec: SweepSpec, v1: float, v2: float,
                   eps: float, band: float) -> tuple[Verdict, float, tuple[str, ...]]:
    try:
        params = _apply_axis(spec.fixed, spec.fixed, spec.variant, spec.axis1.name, v1)
        params = _apply_axis(params, spec.fixed, spec.variant, spec.axis2.name, v2)
        validate_params(params, spec.variant)
        if spec.method is Method.EIGEN:
            verdict = classify(eigenvalues(jacobian_analytic(spec.variant, params)), eps)
            return verdict.tag, verdict.max_real, ()
        if spec.variant.tag is Variant.LIQUIDITY_2X2:
            result = criterion_2x2(params, band)
        elif spec.variant.tag is Variant.SENTIMENT_3X3:
            result = criterion_3x3(params, band)
        else:
            result = rh_5x5(params, band)
        return result.verdict, result.margin, ()
    except _InvalidCell as exc:
        return Verdict.INVALID, float("nan"), (str(exc),)
    except CryptoflowError as exc:
        return Verdict.INVALID, float("nan"), (type(exc).__name__,)


def _timestamp() -> str:
    """ISO timestamp; honours SOURCE_DATE_EPOCH for reproducible outputs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        stamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        stamp = datetime.now(tz=timezone.utc)
    return stamp.isoformat(timespec="seconds")


@dataclass(frozen=True, eq=False)
class StabilityMap:
    """Sweep result: verdict, stored value, and flags per lattice cell.

    The stored value is max Re(lambda) under the eigen method and the
    criterion margin under the closed-form method; Invalid cells store NaN
    and carry a reason flag.
    """

    spec: SweepSpec
    values: np.ndarray
    verdicts: tuple[tuple[Verdict, ...], ...]
    flags: tuple[tuple[tuple[str, ...], ...], ...]
    metadata: dict

    @property
    def shape(self) -> tuple[int, int]:
        return self.spec.axis1.steps, self.spec.axis2.steps

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilityMap):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.values, other.values, equal_nan=True)
            and self.verdicts == other.verdicts
            and self.flags == other.flags
            and self.metadata == other.metadata
        )

    def to_csv(self) -> str:
        """Row-major CSV, one line per cell, 17 significant digits."""
        a1 = self.spec.axis1.values()
        a2 = self.spec.axis2.values()
        lines = ["axis1,axis2,max_real_or_margin,verdict"]
        for i in range(self.spec.axis1.steps):
            for j in range(self.spec.axis2.steps):
                lines.append(
                    f"{a1[i]:.17g},{a2[j]:.17g},"
                    f"{self.values[i, j]:.17g},{self.verdicts[i][j].value}"
                )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "type": "stability_map",
            "variant": self.spec.variant.tag.value,
            "zeta2_denominator": self.spec.variant.zeta2_denominator.value,
            "method": self.spec.method.value,
            "axis1": _axis_doc(self.spec.axis1),
            "axis2": _axis_doc(self.spec.axis2),
            "fixed": _params_doc(self.spec.fixed),
            "values": [
                [None if np.isnan(v) else float(v) for v in row]
                for row in self.values
            ],
            "verdicts": [[v.value for v in row] for row in self.verdicts],
            "flags": [[list(cell) for cell in row] for row in self.flags],
            "metadata": self.metadata,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_svg(self) -> str:
        """Minimal heat-map rendering of the verdict lattice."""
        colors = {
            Verdict.STABLE: "#2166ac",
            Verdict.MARGINAL: "#fee08b",
            Verdict.UNSTABLE: "#b2182b",
            Verdict.INVALID: "#bdbdbd",
        }
        n1, n2 = self.shape
        cell = 8
        width, height = n1 * cell, n2 * cell
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f"<title>{self.spec.variant.tag.value} {self.spec.method.value} "
            f"{self.spec.axis1.name} vs {self.spec.axis2.name}</title>",
        ]
        for i in range(n1):
            for j in range(n2):
                # axis1 runs left to right, axis2 bottom to top
                x = i * cell
                y = (n2 - 1 - j) * cell
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="{colors[self.verdicts[i][j]]}"/>'
                )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _axis_doc(axis: Axis) -> dict:
    return {"name": axis.name, "min": axis.min, "max": axis.max, "steps": axis.steps}


def _params_doc(params: ModelParams) -> dict:
    return {name: getattr(params, name)
            for name in ("q", "q1", "q2", "tau0", "c", "c1", "c2", "c3")}


def run_sweep(
    spec: SweepSpec,
    eps: float = DEFAULT_EPS,
    band: float = DEFAULT_BAND,
    threads: int = 1,
) -> StabilityMap:
    """Evaluate the sweep lattice; threading never changes the result."""
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    a1 = spec.axis1.values()
    a2 = spec.axis2.values()

    def compute_row(i: int):
        return [_evaluate_cell(spec, a1[i], a2[j], eps, band) for j in range(len(a2))]

    if threads == 1:
        rows = [compute_row(i) for i in range(len(a1))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(compute_row, range(len(a1))))

    values = np.array([[cell[1] for cell in row] for row in rows])
    verdicts = tuple(tuple(cell[0] for cell in row) for row in rows)
    flags = tuple(tuple(cell[2] for cell in row) for row in rows)
    metadata = {
        "created": _timestamp(),
        "version": __version__,
        "eps": eps,
        "band": band,
    }
    if "K" in (spec.axis1.name, spec.axis2.name):
        metadata["k_axis_holds_q1"] = spec.fixed.q1
    if "c_over_tau0" in (spec.axis1.name, spec.axis2.name):
        metadata["ratio_axis_holds_tau0"] = spec.fixed.tau0
    return StabilityMap(
        spec=spec, values=values, verdicts=verdicts, flags=flags, metadata=metadata
    )


def boundary_cells(stability_map: StabilityMap) -> list[tuple[int, int]]:
    """Cells sitting on a verdict frontier, in row-major order.

    A cell qualifies when it is not Invalid and some 4-neighbour holds a
    different verdict that is also not Invalid; both sides of a frontier
    qualify.
    """
    n1, n2 = stability_map.shape
    verdicts = stability_map.verdicts
    out = []
    for i in range(n1):
        for j in range(n2):
            mine = verdicts[i][j]
            if mine is Verdict.INVALID:
                continue
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ni, nj = i + di, j + dj
                if not (0 <= ni < n1 and 0 <= nj < n2):
                    continue
                other = verdicts[ni][nj]
                if other is not Verdict.INVALID and other is not mine:
                    out.append((i, j))
                    break
    return out


def export_map(stability_map: StabilityMap, fmt: str) -> str:
    """Serialize a map as 'csv', 'json', or 'svg'."""
    if fmt == "csv":
        return stability_map.to_csv()
    if fmt == "json":
        return stability_map.to_json()
    if fmt == "svg":
        return stability_map.to_svg()
    raise ValueError(f"unknown format {fmt!r}; choose csv, json, or svg")


def map_from_json(text: str) -> StabilityMap:
    """Inverse of StabilityMap.to_json, reconstructing an equal map."""
    doc = json.loads(text)
    if doc.get("type") != "stability_map":
        raise ValueError("not a stability map document")
    variant = ModelVariant(
        Variant(doc["variant"]), Zeta2Denominator(doc["zeta2_denominator"])
    )
    spec = SweepSpec(
        variant=variant,
        fixed=ModelParams(**doc["fixed"]),
        axis1=Axis(**doc["axis1"]),
        axis2=Axis(**doc["axis2"]),
        method=Method(doc["method"]),
    )
    values = np.array(
        [[float("nan") if v is None else v for v in row] for row in doc["values"]]
    )
    verdicts = tuple(tuple(Verdict(v) for v in row) for row in doc["verdicts"])
    flags = tuple(
        tuple(tuple(cell) for cell in row) for row in doc["flags"]
    )
    return StabilityMap(
        spec=spec, values=values, verdicts=verdicts, flags=flags,
        metadata=doc["metadata"],
    )
