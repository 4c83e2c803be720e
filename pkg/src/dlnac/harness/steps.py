"""Step-size sequences and rate tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument

POLICIES = ("constant", "random", "alternating")


def step_sequence(policy: str, k: float, t_final: float, seed: int | None = 0) -> list[float]:
    """Steps k_0, k_1, ... with partial sums not exceeding ``t_final``.

    ``random`` draws k_n = k + k U(0, 1) from ``numpy.random.default_rng(seed)``;
    ``alternating`` cycles k, 2k.  Every step lies in [k, 2k]; the sequence
    stops before the first step that would overshoot ``t_final`` (up to a
    relative 1e-9 rounding allowance), so the run ends within 2k of it.
    """
    if policy not in POLICIES:
        raise InvalidArgument(f"unknown step policy {policy!r}")
    if not (k > 0 and t_final > 0) or k > t_final * (1.0 + 1e-9):
        raise InvalidArgument("need 0 < k <= t_final")
    rng = np.random.default_rng(seed)
    steps: list[float] = []
    t = 0.0
    i = 0
    while True:
        if policy == "constant":
            kn = k
        elif policy == "alternating":
            kn = k if i % 2 == 0 else 2.0 * k
        else:
            kn = k + k * float(rng.random())
        i += 1
        if t + kn > t_final * (1.0 + 1e-9):
            break
        steps.append(kn)
        t += kn
    return steps


@dataclass(frozen=True)
class RateRow:
    k_max: float
    errors: dict
    rates: dict


def observed_rate(e1: float, e2: float, k1: float, k2: float) -> float:
    return math.log(e1 / e2) / math.log(k1 / k2)


def rate_table(rows) -> list[RateRow]:
    """``rows`` is a list of (k_max, {norm: error}) with decreasing k_max;
    rates are computed for every adjacent pair."""
    rows = list(rows)
    if len(rows) < 2:
        raise InvalidArgument("a rate table needs at least two rows")
    ks = [r[0] for r in rows]
    if any(not b < a for a, b in zip(ks, ks[1:])):
        raise InvalidArgument(f"k_max ladder must decrease strictly, got {ks}")
    out = [RateRow(ks[0], dict(rows[0][1]), {name: math.nan for name in rows[0][1]})]
    for (k1, e1), (k2, e2) in zip(rows, rows[1:]):
        rates = {name: observed_rate(e1[name], e2[name], k1, k2) for name in e2}
        out.append(RateRow(k2, dict(e2), rates))
    return out
