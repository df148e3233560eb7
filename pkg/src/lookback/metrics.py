"""Post-warm-up performance metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

RATE_FLOOR = 1e3


@dataclass
class UserTrace:
    bins: np.ndarray  # bits served in each 1 s bin after warm-up
    total_bits: float
    duration: float  # measured seconds
    frozen_time: float = 0.0
    session_time: float = 0.0

    @property
    def mean_rate(self) -> float:
        return self.total_bits / self.duration if self.duration > 0 else 0.0

    @property
    def freeze_fraction(self) -> float:
        return self.frozen_time / self.session_time if self.session_time > 0 else 0.0


@dataclass
class RunReport:
    T_Net: float
    J_Net: float | None
    T_Slot10: float | None
    F_LT_avg: float | None
    J_F_Net: float | None
    R_log_net: float
    n_users: int
    n_handovers: int = 0
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def jain_index(values) -> float | None:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return None
    top = float(np.abs(x).max())
    if top == 0.0:
        return None
    x = x / top  # keeps tiny values from underflowing when squared
    return float(x.sum()) ** 2 / (x.size * float((x * x).sum()))


def network_throughput(traces: list[UserTrace]) -> float:
    return float(sum(t.mean_rate for t in traces))


def nearest_rank(values, pct: float) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    rank = max(1, math.ceil(pct / 100.0 * v.size))
    return float(v[rank - 1])


def slot_percentile_throughput(traces: list[UserTrace], pct: float = 10.0, min_bins: int = 10) -> float | None:
    """Mean over users of the per-user pct-th percentile of 1 s throughput bins."""
    vals = [nearest_rank(t.bins, pct) for t in traces if len(t.bins) >= min_bins]
    return float(np.mean(vals)) if vals else None


def log_sum_rate(traces: list[UserTrace], floor: float = RATE_FLOOR) -> float:
    return float(sum(math.log(max(t.mean_rate, floor)) for t in traces))


def freezing_metrics(traces: list[UserTrace]) -> tuple[float, float | None]:
    fractions = [t.freeze_fraction for t in traces]
    mean = float(np.mean(fractions)) if fractions else 0.0
    return mean, jain_index(fractions)


def build_report(traces: list[UserTrace], streaming: bool, **extra) -> RunReport:
    rates = [t.mean_rate for t in traces]
    f_avg, j_f = freezing_metrics(traces) if streaming else (None, None)
    return RunReport(
        T_Net=network_throughput(traces),
        J_Net=jain_index(rates),
        T_Slot10=slot_percentile_throughput(traces),
        F_LT_avg=f_avg,
        J_F_Net=j_f,
        R_log_net=log_sum_rate(traces),
        n_users=len(traces),
        **extra,
    )
