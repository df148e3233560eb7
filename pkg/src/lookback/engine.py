"""Discrete-time multi-cell downlink simulation.

Time advances in 1 ms TTIs grouped into mobility blocks (100 ms by
default). Between blocks the engine moves users, redraws decorrelated
shadowing and re-evaluates association; inside a block the numba kernel
runs the per-TTI loop: arrivals, per-cell scheduling on the rate reported
in the previous TTI, service, channel sampling, playback and averages.

Randomness comes from per-user generators keyed by purpose, so changing
the scheduler leaves mobility, shadowing, fading and association unchanged.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .channel import ShadowMap, rx_power
from .config import ScenarioConfig
from .geometry import HexNetwork, RandomWaypointUsers, build_hex_layout
from .handover import MULTI_CELL, HandoverRecord, QosState, best_servers, maybe_handover
from .metrics import RunReport, UserTrace, build_report
from .schedulers import IDLE, norm_value, queue_factor, update_moving_average, user_weight

MOBILITY, SHADOWING, FADING = 1, 2, 3


def user_rngs(seed: int, purpose: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(purpose, i))) for i in range(n)]


@njit(cache=True)
def _run_block(
    k_slots, g0, warm_slots, slots_per_bin, tti,
    rxp, fading, cell_ptr, cell_users, serving,
    full_buffer, full_reuse, noise_power, clip, bandwidth,
    rule, alpha, beta, steepness, mirrored, queue_weight, queue_scale, rate_floor, freeze_floor,
    w_short, w_long, stream_rate, threshold, arrival_rate,
    r_rep, short_avg, long_avg, short_pending, long_pending, queue,
    content, playing, started, sess_frozen, sess_time, sched_frozen, sched_time,
    arrived, delivered, consumed, meas_bits, meas_frozen, meas_time, bins, bin_frozen,
    log_on, log_sel, log_used, log_sampled,
):
    n_users, n_cells = rxp.shape
    n_bins = bins.shape[1]
    served = np.zeros(n_users)
    idx = np.empty(n_users, dtype=np.int64)
    active = np.zeros(n_cells, dtype=np.bool_)
    for k in range(k_slots):
        g = g0 + k
        measuring = g >= warm_slots
        served[:] = 0.0
        active[:] = False

        if not full_buffer:
            for i in range(n_users):
                queue[i] += arrival_rate[i] * tti
                arrived[i] += arrival_rate[i] * tti

        # scheduling on the CQI reported in the previous TTI
        for m in range(n_cells):
            if log_on:
                log_sel[k, m] = IDLE
            n_el = 0
            peak = 0.0
            aq_sum = 0.0
            for j in range(cell_ptr[m], cell_ptr[m + 1]):
                i = cell_users[j]
                if short_pending[i]:
                    continue  # no CQI in this cell yet
                if not full_buffer and queue[i] <= 0.0:
                    continue
                idx[n_el] = i
                n_el += 1
                if short_avg[i] > peak:
                    peak = short_avg[i]
                if not full_buffer:
                    aq_sum += queue_weight[i] * queue[i] * queue_scale
            if n_el == 0:
                continue
            aq_mean = aq_sum / n_el
            best = IDLE
            best_w = 0.0
            for e in range(n_el):
                i = idx[e]
                qf = 1.0
                if not full_buffer:
                    qf = queue_factor(queue_weight[i] * queue[i] * queue_scale, aq_mean)
                fr = sched_frozen[i] / sched_time[i] if sched_time[i] > 0.0 else 0.0
                w = user_weight(rule, r_rep[i], short_avg[i], long_avg[i], norm_value(short_avg[i], peak), qf,
                                fr, alpha[i], beta, steepness, mirrored, rate_floor, freeze_floor)
                if best == IDLE or w > best_w:
                    best = i
                    best_w = w
            u = best
            bits = r_rep[u] * tti
            if not full_buffer:
                bits = min(bits, queue[u])
                queue[u] -= bits
            served[u] = bits
            active[m] = True
            if log_on:
                log_sel[k, m] = u
                log_used[k, m] = r_rep[u]

        # CQI for the next TTI, measured under this TTI's interference
        for i in range(n_users):
            s = serving[i]
            interference = 0.0
            if full_reuse:
                for m in range(n_cells):
                    if m != s and active[m]:
                        interference += rxp[i, m]
            sinr = rxp[i, s] * fading[k, i] / (noise_power + interference)
            if sinr > clip:
                sinr = clip
            r_new = bandwidth * np.log2(1.0 + sinr)

            if not full_buffer:
                delivered[i] += served[i]
                # playback: fill, consume, then freeze/resume checks
                content[i] += served[i] / stream_rate
                if playing[i]:
                    consumed[i] += min(tti, content[i])
                    content[i] -= tti
                    if content[i] <= 0.0:
                        content[i] = 0.0
                        playing[i] = False
                if not playing[i]:
                    if started[i]:
                        sess_frozen[i] += tti
                        sched_frozen[i] += tti
                        if measuring:
                            meas_frozen[i] += tti
                            b = (g - warm_slots) // slots_per_bin
                            if b < n_bins:
                                bin_frozen[i, b] += tti
                    if content[i] >= threshold:
                        playing[i] = True
                        started[i] = True
                if started[i]:
                    sess_time[i] += tti
                    sched_time[i] += tti
                    if measuring:
                        meas_time[i] += tti

            rate = served[i] / tti
            if short_pending[i]:
                short_avg[i] = r_new
                short_pending[i] = False
            else:
                short_avg[i] = update_moving_average(short_avg[i], rate, 1.0, w_short)
            if long_pending[i]:
                long_avg[i] = r_new
                long_pending[i] = False
            else:
                long_avg[i] = update_moving_average(long_avg[i], rate, 1.0, w_long)
            r_rep[i] = r_new
            if log_on:
                log_sampled[k, i] = r_new

            if measuring:
                meas_bits[i] += served[i]
                b = (g - warm_slots) // slots_per_bin
                if b < n_bins:
                    bins[i, b] += served[i]


@dataclass
class RunLog:
    report: RunReport
    traces: list[UserTrace]
    bin_serving: np.ndarray  # (N, bins) serving cell at the start of each bin
    bin_frozen: np.ndarray  # (N, bins) seconds frozen within each bin
    handovers: list[HandoverRecord]
    env_digests: dict[str, str]
    config: ScenarioConfig
    decisions: dict | None = None
    conservation: dict = field(default_factory=dict)


class Simulation:
    """One run of a scenario. `mobility` and `network` may be injected for scripted cases."""

    def __init__(self, config: ScenarioConfig, network: HexNetwork | None = None, mobility=None,
                 log_decisions: bool = False, log_window: tuple[float, float] | None = None):
        self.cfg = config
        self.network = network if network is not None else build_hex_layout(config.rings, config.D, config.cells or None)
        n, m = config.users, self.network.n_cells
        seed = config.seed
        if mobility is None:
            mobility = RandomWaypointUsers(self.network, config.speed, user_rngs(seed, MOBILITY, n))
        self.mobility = mobility
        if len(mobility.positions) != n:
            raise ValueError("mobility model user count does not match config.users")
        self.shadow = ShadowMap(n, m, config.channel, user_rngs(seed, SHADOWING, n))
        self.fading_rngs = user_rngs(seed, FADING, n)
        self.log_decisions = log_decisions
        self.log_window = log_window

        self.serving = best_servers(mobility.positions, self.network, self.shadow.values, config.channel)
        self.qos = [QosState() for _ in range(n)]
        self.handovers: list[HandoverRecord] = []
        self._digests = {k: hashlib.sha256() for k in ("mobility", "shadowing", "fading", "association", "arrivals")}

        sp = config.scheduler
        self.alpha = np.full(n, float(sp.alpha))
        self.queue_weight = np.full(n, float(sp.queue_weight))
        self.arrival_rate = np.full(n, float(config.traffic.arrival_rate) if config.streaming else 0.0)
        self._digests["arrivals"].update(self.arrival_rate.tobytes())

        self.r_rep = np.zeros(n)
        self.short_avg = np.zeros(n)
        self.long_avg = np.zeros(n)
        self.short_pending = np.ones(n, dtype=np.bool_)
        self.long_pending = np.ones(n, dtype=np.bool_)
        self.queue = np.zeros(n)
        self.content = np.zeros(n)
        self.playing = np.zeros(n, dtype=np.bool_)
        self.started = np.zeros(n, dtype=np.bool_)
        self.sess_frozen = np.zeros(n)
        self.sess_time = np.zeros(n)
        self.sched_frozen = np.zeros(n)
        self.sched_time = np.zeros(n)
        self.arrived = np.zeros(n)
        self.delivered = np.zeros(n)
        self.dropped = np.zeros(n)
        self.consumed = np.zeros(n)
        self.meas_bits = np.zeros(n)
        self.meas_frozen = np.zeros(n)
        self.meas_time = np.zeros(n)

        self.total_slots = int(round(config.sim_time / config.tti))
        self.warm_slots = int(round(config.warm_up / config.tti))
        self.slots_per_bin = int(round(1.0 / config.tti))
        self.block_slots = int(round(config.mobility_step / config.tti))
        n_bins = (self.total_slots - self.warm_slots) // self.slots_per_bin
        self.bins = np.zeros((n, n_bins))
        self.bin_frozen = np.zeros((n, n_bins))
        self.bin_serving = np.full((n, n_bins), -1, dtype=np.int64)
        self._fading_buf = np.empty((0, n))
        self._fading_pos = 0

    # -- per-block environment -------------------------------------------------
    def _fading_block(self, k: int) -> np.ndarray:
        if self._fading_pos + k > len(self._fading_buf):
            chunk = max(k, 10 * self.block_slots)
            rest = self._fading_buf[self._fading_pos:]
            fresh = np.stack([rng.standard_exponential(chunk) for rng in self.fading_rngs], axis=1)
            self._fading_buf = np.concatenate([rest, fresh])
            self._fading_pos = 0
        out = self._fading_buf[self._fading_pos:self._fading_pos + k]
        self._fading_pos += k
        return out

    def _sync_qos_from_arrays(self, i: int) -> QosState:
        return QosState(
            short_avg=float(self.short_avg[i]), long_avg=float(self.long_avg[i]),
            frozen_time=float(self.sched_frozen[i]), session_time=float(self.sched_time[i]),
            short_pending=bool(self.short_pending[i]), long_pending=bool(self.long_pending[i]),
        )

    def _apply_qos(self, i: int, st: QosState):
        self.short_avg[i], self.long_avg[i] = st.short_avg, st.long_avg
        self.sched_frozen[i], self.sched_time[i] = st.frozen_time, st.session_time
        self.short_pending[i], self.long_pending[i] = st.short_pending, st.long_pending

    def _environment_step(self, t: float):
        moved = self.mobility.advance(self.cfg.mobility_step)
        self.shadow.update(moved)
        new = best_servers(self.mobility.positions, self.network, self.shadow.values, self.cfg.channel, self.serving)
        for i in np.flatnonzero(new != self.serving):
            serving, st, rec = maybe_handover(int(self.serving[i]), int(i), int(new[i]), self.cfg.handover_mode,
                                              self._sync_qos_from_arrays(i), t)
            self.serving[i] = serving
            self._apply_qos(i, st)
            if self.cfg.traffic.queue_at_handover == "drop":
                self.dropped[i] += self.queue[i]
                self.queue[i] = 0.0
            self.handovers.append(rec)

    # -- main loop ---------------------------------------------------------------
    def run(self) -> RunLog:
        cfg, ch, sp = self.cfg, self.cfg.channel, self.cfg.scheduler
        n, m = cfg.users, self.network.n_cells
        dec = None
        if self.log_decisions:
            lo, hi = self.log_window or (0.0, cfg.sim_time)
            first, last = int(round(lo / cfg.tti)), int(round(hi / cfg.tti))
            dec = {"first": first, "sel": [], "used": [], "sampled": []}
        g = 0
        while g < self.total_slots:
            if g > 0:
                self._environment_step(g * cfg.tti)
            k = min(self.block_slots, self.total_slots - g)
            rxp = rx_power(self.mobility.positions, self.network, self.shadow.values, ch)
            fading = np.ascontiguousarray(self._fading_block(k))
            order = np.argsort(self.serving, kind="stable")
            cell_ptr = np.searchsorted(self.serving[order], np.arange(m + 1))
            for name, arr in (("mobility", self.mobility.positions), ("shadowing", self.shadow.values),
                              ("fading", fading), ("association", self.serving)):
                self._digests[name].update(np.ascontiguousarray(arr).tobytes())
            if g >= self.warm_slots:
                b = (g - self.warm_slots) // self.slots_per_bin
                if b < self.bins.shape[1] and (g - self.warm_slots) % self.slots_per_bin == 0:
                    self.bin_serving[:, b] = self.serving

            log_on = dec is not None and g + k > first and g < last
            log_sel = np.empty((k if log_on else 0, m), dtype=np.int64)
            log_used = np.empty((k if log_on else 0, m))
            log_sampled = np.empty((k if log_on else 0, n))
            _run_block(
                k, g, self.warm_slots, self.slots_per_bin, cfg.tti,
                rxp, fading, cell_ptr.astype(np.int64), order.astype(np.int64), self.serving.astype(np.int64),
                not cfg.streaming, ch.interference_mode == "full-reuse", ch.noise_power, ch.sinr_clip, ch.bandwidth,
                int(sp.rule), self.alpha, sp.beta, sp.steepness, sp.sigmoid_mirrored, self.queue_weight,
                sp.queue_scale, sp.rate_floor, sp.freeze_floor,
                sp.w_short / cfg.tti, sp.w_long / cfg.tti, cfg.traffic.stream_rate, cfg.traffic.threshold,
                self.arrival_rate,
                self.r_rep, self.short_avg, self.long_avg, self.short_pending, self.long_pending, self.queue,
                self.content, self.playing, self.started, self.sess_frozen, self.sess_time,
                self.sched_frozen, self.sched_time,
                self.arrived, self.delivered, self.consumed, self.meas_bits, self.meas_frozen, self.meas_time,
                self.bins, self.bin_frozen,
                log_on, log_sel, log_used, log_sampled,
            )
            if log_on:
                dec["sel"].append(log_sel)
                dec["used"].append(log_used)
                dec["sampled"].append(log_sampled)
                dec.setdefault("start", g)
            g += k
        return self._finish(dec)

    def _finish(self, dec) -> RunLog:
        cfg = self.cfg
        duration = (self.total_slots - self.warm_slots) * cfg.tti
        traces = [
            UserTrace(bins=self.bins[i].copy(), total_bits=float(self.meas_bits[i]), duration=duration,
                      frozen_time=float(self.meas_frozen[i]), session_time=float(self.meas_time[i]))
            for i in range(cfg.users)
        ]
        report = build_report(traces, cfg.streaming, n_handovers=len(self.handovers),
                              config=cfg.to_dict(), seed=cfg.seed)
        if dec is not None:
            start = dec.get("start", 0)
            dec = {
                "start_slot": start,
                "sel": np.concatenate(dec["sel"]) if dec["sel"] else np.empty((0, self.network.n_cells), dtype=np.int64),
                "used": np.concatenate(dec["used"]) if dec["used"] else np.empty((0, self.network.n_cells)),
                "sampled": np.concatenate(dec["sampled"]) if dec["sampled"] else np.empty((0, cfg.users)),
            }
        conservation = {
            "arrived": self.arrived.copy(), "queue": self.queue.copy(), "dropped": self.dropped.copy(), "delivered": self.delivered.copy(),
            "consumed_bits": self.consumed * cfg.traffic.stream_rate,
            "buffered_bits": self.content * cfg.traffic.stream_rate,
        }
        return RunLog(
            report=report, traces=traces, bin_serving=self.bin_serving, bin_frozen=self.bin_frozen,
            handovers=list(self.handovers), env_digests={k: h.hexdigest() for k, h in self._digests.items()},
            config=cfg, decisions=dec, conservation=conservation,
        )


def run(config: ScenarioConfig, **kwargs) -> RunLog:
    return Simulation(config, **kwargs).run()
