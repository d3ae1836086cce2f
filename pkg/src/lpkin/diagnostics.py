"""Run-level analysis: conservation drift, entropy monotonicity, and
empirical convergence order."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .grid import Distribution, l1_distance
from .steppers import RunRecord

__all__ = ["ConvergenceReport", "drift_report", "entropy_report", "order_study"]

DRIFT_FLOOR = 1e-14  # guards relative drift of identically-zero quantities

REFERENCES = ("finest", "richardson", "exact")


@dataclass(frozen=True)
class ConvergenceReport:
    dt_values: tuple[float, ...]
    errors: tuple[float, ...]
    observed_orders: tuple[float, ...]
    reference: str

    @property
    def mean_order(self) -> float:
        return float(np.mean(self.observed_orders))


def drift_report(rec: RunRecord) -> dict[str, float]:
    """Max relative drift of each conserved quantity over the recorded steps."""
    if not rec.moments:
        raise UsageError("drift_report needs a non-empty run record")
    m0 = rec.moments[0]
    out: dict[str, float] = {}

    def rel(series, base):
        denom = max(abs(base), DRIFT_FLOOR)
        return max(abs(v - base) for v in series) / denom

    out["mass"] = rel([m.mass for m in rec.moments], m0.mass)
    for d in range(len(m0.momentum)):
        out[f"momentum_{'xyz'[d]}"] = rel([m.momentum[d] for m in rec.moments], m0.momentum[d])
    out["energy"] = rel([m.energy for m in rec.moments], m0.energy)
    return out


def entropy_report(rec: RunRecord) -> tuple[bool, float]:
    """(monotone, max increase) over consecutive steps with defined entropy.

    An undefined entry breaks the chain: entries on opposite sides of a
    gap are never compared.
    """
    if not rec.moments:
        raise UsageError("entropy_report needs a non-empty run record")
    worst = -math.inf
    seen_pair = False
    for a, b in zip(rec.moments, rec.moments[1:]):
        if a.entropy is None or b.entropy is None:
            continue
        seen_pair = True
        worst = max(worst, b.entropy - a.entropy)
    if not seen_pair:
        return True, -math.inf
    return worst <= 1e-10, worst


def _validate_dts(dt_list, T: float) -> None:
    if len(dt_list) < 3:
        raise UsageError("order_study needs at least 3 dt values")
    for a, b in zip(dt_list, dt_list[1:]):
        if abs(b - a / 2.0) > 1e-9 * a:
            raise UsageError(f"dt list must halve at each entry, got {a} -> {b}")
    for dt in dt_list:
        ratio = T / dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise UsageError(f"dt={dt} does not divide T={T}")


def order_study(
    run_at_dt,
    dt_list,
    T: float,
    reference: str = "finest",
    exact: Distribution | None = None,
) -> ConvergenceReport:
    """Observed convergence order of a scheme in the step size.

    ``run_at_dt(dt)`` must return the state at time T computed with that
    step.  References: ``exact`` compares against a supplied solution,
    ``finest`` against the smallest-dt run, and ``richardson`` uses the
    distances between consecutive runs (unbiased for first-order schemes,
    whereas finest-run errors overestimate the order near the reference).
    """
    dt_list = list(dt_list)
    _validate_dts(dt_list, T)
    if reference not in REFERENCES:
        raise UsageError(f"reference must be one of {REFERENCES}")
    if reference == "exact" and exact is None:
        raise UsageError("exact reference requested but no exact solution given")

    finals = [run_at_dt(dt) for dt in dt_list]

    if reference == "exact":
        dts = dt_list
        errors = [l1_distance(f, exact) for f in finals]
    elif reference == "finest":
        dts = dt_list[:-1]
        errors = [l1_distance(f, finals[-1]) for f in finals[:-1]]
    else:
        dts = dt_list[:-1]
        errors = [l1_distance(a, b) for a, b in zip(finals, finals[1:])]

    if any(e <= 0.0 for e in errors):
        raise UsageError("degenerate order study: zero error between runs")
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    return ConvergenceReport(
        dt_values=tuple(dts), errors=tuple(errors), observed_orders=tuple(orders),
        reference=reference,
    )
