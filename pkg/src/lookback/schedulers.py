"""Scheduling weight rules and the moving-average machinery behind them.

Every rule maps per-user observables of one cell to a weight; the cell
serves the arg-max. The scalar kernels are numba-compiled so the engine's
TTI loop can call them directly; the `weight_*` helpers and `schedule` are
plain numpy front ends for analysis and tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

NORM_FLOOR = 0.05
IDLE = -1


class Rule(enum.IntEnum):
    MR = 0
    PF_SHORT = 1
    PF_LONG = 2
    EXP = 3
    LL_PF_EXP = 4
    LL_PF_SIG = 5
    LL_EXP = 6
    LL_EXP_FREEZE = 7

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, name: "str | int | Rule") -> "Rule":
        if isinstance(name, Rule):
            return name
        if isinstance(name, int):
            return cls(name)
        key = name.strip().upper().replace("-", "_")
        if key in cls.__members__:
            return cls[key]
        for rule, label in _LABELS.items():
            if label.upper() == name.strip().upper():
                return rule
        raise ValueError(f"unknown scheduler rule {name!r}")


_LABELS = {
    Rule.MR: "MR",
    Rule.PF_SHORT: "PF-Short",
    Rule.PF_LONG: "PF-Long",
    Rule.EXP: "EXP",
    Rule.LL_PF_EXP: "LL-PF-Exp",
    Rule.LL_PF_SIG: "LL-PF-Sig",
    Rule.LL_EXP: "LL-EXP",
    Rule.LL_EXP_FREEZE: "LL-EXP-Freeze",
}

# rules whose weight depends on the BS queues
QUEUE_AWARE = frozenset({Rule.EXP, Rule.LL_EXP, Rule.LL_EXP_FREEZE})


@dataclass
class SchedulerParams:
    rule: Rule = Rule.PF_SHORT
    w_short: float = 1.0  # seconds
    w_long: float = 300.0  # seconds
    alpha: float = 0.0
    beta: float = 0.5
    steepness: float = 10.0
    queue_weight: float = 1.0
    queue_scale: float = 1e-6  # bits -> megabits inside the EXP exponent
    rate_floor: float = 1e3  # bits/s
    freeze_floor: float = 0.01
    sigmoid_mirrored: bool = False

    def __post_init__(self):
        self.rule = Rule.parse(self.rule)
        if self.w_short <= 0 or self.w_long <= 0:
            raise ValueError("averaging windows must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.steepness <= 0:
            raise ValueError("steepness must be positive")
        if self.rate_floor <= 0 or self.freeze_floor <= 0:
            raise ValueError("floors must be positive")


@njit(cache=True)
def update_moving_average(avg, inst_rate, scheduled, window_slots):
    """One slot of R <- r*p/W + (1 - 1/W)*R."""
    inv = 1.0 / window_slots
    return inv * inst_rate * scheduled + (1.0 - inv) * avg


@njit(cache=True)
def norm_value(short_avg, peak):
    """Short-term average relative to the cell's best, clamped to [0.05, 1]."""
    if peak <= 0.0:
        return NORM_FLOOR
    return min(max(short_avg / peak, NORM_FLOOR), 1.0)


@njit(cache=True)
def normalize_short_rates(short_avgs):
    peak = 0.0
    for v in short_avgs:
        if v > peak:
            peak = v
    out = np.empty(short_avgs.shape[0])
    for k in range(short_avgs.shape[0]):
        out[k] = norm_value(short_avgs[k], peak)
    return out


@njit(cache=True)
def utility_exp(x, alpha):
    return np.exp(alpha / x)


@njit(cache=True)
def utility_sigmoid(x, beta, c):
    return 1.0 - np.exp(-c * (x - beta))


@njit(cache=True)
def utility_sigmoid_mirrored(x, beta, c):
    return 1.0 + np.exp(-c * (x - beta))


@njit(cache=True)
def queue_factor(scaled_queue, mean_scaled_queue):
    return np.exp((scaled_queue - mean_scaled_queue) / (1.0 + np.sqrt(mean_scaled_queue)))


@njit(cache=True)
def exp_queue_factor(queues, queue_weights, queue_scale):
    """exp((a q - mean) / (1 + sqrt(mean))) with a*q scaled to megabits."""
    n = queues.shape[0]
    aq = np.empty(n)
    total = 0.0
    for k in range(n):
        aq[k] = queue_weights[k] * queues[k] * queue_scale
        total += aq[k]
    mean = total / n
    out = np.empty(n)
    for k in range(n):
        out[k] = queue_factor(aq[k], mean)
    return out


@njit(cache=True)
def user_weight(rule, inst_rate, short_avg, long_avg, norm, qfactor, freeze, alpha, beta, c,
                mirrored, rate_floor, freeze_floor):
    """Weight of one user given cell-level context (norm and queue factor)."""
    if rule == 0:
        return inst_rate
    if rule == 1:
        return inst_rate / max(short_avg, rate_floor)
    if rule == 2:
        return inst_rate / max(long_avg, rate_floor)
    if rule == 3:
        return inst_rate / max(short_avg, rate_floor) * qfactor
    if rule == 4:
        return inst_rate / max(long_avg, rate_floor) * utility_exp(norm, alpha)
    if rule == 5:
        if mirrored:
            u = utility_sigmoid_mirrored(norm, beta, c)
        else:
            u = utility_sigmoid(norm, beta, c)
        return inst_rate / max(long_avg, rate_floor) * u
    if rule == 6:
        return inst_rate / max(long_avg, rate_floor) * qfactor
    # no division by an average rate for the freeze-aware rule
    return inst_rate * max(freeze, freeze_floor) * qfactor


@njit(cache=True)
def rule_weights(rule, inst_rate, short_avg, long_avg, queues, queue_weights, freeze, alpha,
                 beta, c, mirrored, queue_scale, rate_floor, freeze_floor):
    """Weights of the users competing in one cell this TTI."""
    n = inst_rate.shape[0]
    norm = normalize_short_rates(short_avg)
    qf = exp_queue_factor(queues, queue_weights, queue_scale)
    out = np.empty(n)
    for k in range(n):
        out[k] = user_weight(rule, inst_rate[k], short_avg[k], long_avg[k], norm[k], qf[k], freeze[k],
                             alpha[k], beta, c, mirrored, rate_floor, freeze_floor)
    return out


def weight_mr(inst_rate):
    return np.asarray(inst_rate, dtype=float).copy()


def weight_pf(inst_rate, avg, rate_floor=1e3):
    return np.asarray(inst_rate, dtype=float) / np.maximum(avg, rate_floor)


def weight_exp(inst_rate, short_avg, queues, queue_weights=None, queue_scale=1e-6, rate_floor=1e3):
    q = np.asarray(queues, dtype=float)
    a = np.ones_like(q) if queue_weights is None else np.asarray(queue_weights, dtype=float)
    return weight_pf(inst_rate, short_avg, rate_floor) * exp_queue_factor(q, a, queue_scale)


def weight_ll_pf_exp(inst_rate, long_avg, norm_short, alpha, rate_floor=1e3):
    return weight_pf(inst_rate, long_avg, rate_floor) * np.exp(np.asarray(alpha) / np.asarray(norm_short))


def weight_ll_pf_sig(inst_rate, long_avg, norm_short, beta, c, rate_floor=1e3, mirrored=False):
    x = np.asarray(norm_short, dtype=float)
    u = 1.0 + np.exp(-c * (x - beta)) if mirrored else 1.0 - np.exp(-c * (x - beta))
    return weight_pf(inst_rate, long_avg, rate_floor) * u


def weight_ll_exp(inst_rate, long_avg, queues, queue_weights=None, queue_scale=1e-6, rate_floor=1e3):
    return weight_exp(inst_rate, long_avg, queues, queue_weights, queue_scale, rate_floor)


def weight_ll_exp_freeze(inst_rate, freeze, queues, queue_weights=None, queue_scale=1e-6, freeze_floor=0.01):
    q = np.asarray(queues, dtype=float)
    a = np.ones_like(q) if queue_weights is None else np.asarray(queue_weights, dtype=float)
    return (np.asarray(inst_rate, dtype=float) * np.maximum(freeze, freeze_floor)
            * exp_queue_factor(q, a, queue_scale))


@njit(cache=True)
def select_user(weights):
    """Index of the largest weight, lowest index on ties; IDLE if empty."""
    best = IDLE
    best_w = 0.0
    for k in range(weights.shape[0]):
        if best == IDLE or weights[k] > best_w:
            best = k
            best_w = weights[k]
    return best


def schedule(params: SchedulerParams, inst_rate, short_avg, long_avg, queues=None, freeze=None,
             alpha=None, queue_weights=None) -> int:
    """Pick the user to serve among the given (eligible) users of one cell."""
    inst_rate = np.asarray(inst_rate, dtype=float)
    n = inst_rate.shape[0]
    if n == 0:
        return IDLE
    zeros = np.zeros(n)
    queues = zeros if queues is None else np.asarray(queues, dtype=float)
    freeze = zeros if freeze is None else np.asarray(freeze, dtype=float)
    alpha = np.full(n, params.alpha) if alpha is None else np.asarray(alpha, dtype=float)
    queue_weights = np.full(n, params.queue_weight) if queue_weights is None else np.asarray(queue_weights, dtype=float)
    w = rule_weights(int(params.rule), inst_rate, np.asarray(short_avg, dtype=float),
                     np.asarray(long_avg, dtype=float), queues, queue_weights, freeze, alpha,
                     params.beta, params.steepness, params.sigmoid_mirrored, params.queue_scale,
                     params.rate_floor, params.freeze_floor)
    return int(select_user(w))
