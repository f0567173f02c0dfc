"""Discrete-event model of a factory complex: level-1 T producers feeding a CCZ or C2T consumer.

Time is measured in units of d surface-code cycles. Producers finish an
attempt every ``level1_period_d``; a finished state goes into that
producer's hallway buffer, and a producer whose buffer is full parks its
state in its own output patch and idles until the consumer takes a state.
Parked states count as available. The consumer draws from
all hallways as one pool, starting a run once ``inputs`` states are ready
and its previous run has cleared.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numba
import numpy as np

TRACE_COLUMNS = ("run", "start_d", "end_d", "buffered_before", "stall_d", "status")
STATUS_NAMES = {0: "good", 1: "bad", 2: "discarded"}


@dataclass(frozen=True)
class ConsumerSpec:
    kind: str = "CCZ"
    period_d: float = 5.5
    inputs: int = 8
    outputs: int = 1

    @property
    def has_catalyst(self) -> bool:
        return self.kind == "C2T"


CCZ_CONSUMER = ConsumerSpec("CCZ", 5.5, 8, 1)
C2T_CONSUMER = ConsumerSpec("C2T", 6.5, 8, 2)

LEGACY_LEVEL1_PERIOD = 3.25
IMPROVED_LEVEL1_PERIOD = 3.125


@dataclass(frozen=True)
class PipelineConfig:
    num_level1: int = 5
    level1_period_d: float = LEGACY_LEVEL1_PERIOD
    level1_discard_prob: float = 0.03
    buffer_capacity: int = 2
    consumer: ConsumerSpec = CCZ_CONSUMER
    ccz_detect_prob: float = 0.0
    ccz_error_prob: float = 0.0
    bootstrap_delay_d: float = 10.0
    horizon_d: float = 1e5
    seed: int = 0
    routing_latency_d: float = 0.0

    def __post_init__(self):
        if self.num_level1 < 1:
            raise ValueError("need at least one level-1 factory")
        if self.level1_period_d <= 0 or self.consumer.period_d <= 0:
            raise ValueError("periods must be positive")
        for name in ("level1_discard_prob", "ccz_detect_prob", "ccz_error_prob"):
            p = getattr(self, name)
            if not 0 <= p < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.ccz_detect_prob + self.ccz_error_prob >= 1:
            raise ValueError("ccz_detect_prob + ccz_error_prob must be below 1")
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be at least 1")
        if self.consumer.inputs < 1 or self.consumer.outputs < 1:
            raise ValueError("consumer needs positive inputs and outputs")
        # Each producer holds buffer_capacity states plus the one parked in its output patch.
        if self.num_level1 * (self.buffer_capacity + 1) < self.consumer.inputs:
            raise ValueError(f"{self.num_level1} producers with buffer {self.buffer_capacity} can never "
                             f"hold the {self.consumer.inputs} inputs a consumer run needs")
        if self.horizon_d < 0 or self.bootstrap_delay_d < 0 or self.routing_latency_d < 0:
            raise ValueError("horizon, bootstrap delay and routing latency must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["version"] = 1
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        if not isinstance(d, dict) or d.get("version") != 1:
            raise ValueError("pipeline config needs \"version\": 1")
        d = dict(d)
        d.pop("version")
        consumer = d.pop("consumer", None)
        if isinstance(consumer, str):
            presets = {"CCZ": CCZ_CONSUMER, "C2T": C2T_CONSUMER}
            if consumer not in presets:
                raise ValueError(f"unknown consumer {consumer!r}")
            d["consumer"] = presets[consumer]
        elif isinstance(consumer, dict):
            d["consumer"] = ConsumerSpec(**consumer)
        names = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown pipeline config fields {sorted(unknown)}")
        return cls(**d)


def c2t_error_probs(eps_t1: float) -> tuple:
    """Leading-order (detected, undetected) CCZ error probabilities for 8 inputs at ``eps_t1``."""
    detect = 8 * eps_t1 * (1 - eps_t1) ** 7
    error = 28 * eps_t1 ** 2 * (1 - eps_t1) ** 6
    return detect, error


def ccz_default_config(**overrides) -> PipelineConfig:
    return replace(PipelineConfig(), **overrides)


def c2t_default_config(**overrides) -> PipelineConfig:
    cfg = PipelineConfig(num_level1=4, level1_period_d=IMPROVED_LEVEL1_PERIOD, consumer=C2T_CONSUMER)
    return replace(cfg, **overrides)


@dataclass
class PipelineStats:
    outputs_produced: int
    runs_completed: int
    mean_output_period_d: float
    consumer_stall_fraction: float
    buffer_occupancy_histogram: list
    catalyst_discard_events: int
    discarded_runs: int
    bad_outputs: int
    first_bad_output_index: Optional[int]
    level1_attempts: int
    level1_discards: int
    level1_produced: int
    inputs_consumed: int
    buffered_at_end: int
    held_at_end: int
    producer_blocked_fraction: float
    horizon_d: float
    runs_started: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def distillations_per_catalyst_discard(self) -> float:
        if not self.catalyst_discard_events:
            return math.inf
        return self.runs_started / self.catalyst_discard_events

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_table(self) -> str:
        rows = [
            ("outputs produced", self.outputs_produced),
            ("runs completed", self.runs_completed),
            ("mean output period (d)", f"{self.mean_output_period_d:.4f}"),
            ("consumer stall fraction", f"{self.consumer_stall_fraction:.4%}"),
            ("catalyst discards", self.catalyst_discard_events),
            ("bad outputs", self.bad_outputs),
            ("level-1 attempts / discards", f"{self.level1_attempts} / {self.level1_discards}"),
            ("producer blocked fraction", f"{self.producer_blocked_fraction:.4%}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


@numba.njit(cache=True)
def _simulate_core(P, period, q, cap, inputs, cperiod, has_catalyst, detect_p, error_p,
                   bootstrap, horizon, latency, seed, trace):
    np.random.seed(seed)
    inf = np.inf
    # Slot ``cap`` of each ring is the producer's own output patch: a state
    # parked there blocks the producer but is still available downstream.
    slots = cap + 1
    next_done = np.empty(P)
    for i in range(P):
        # Stagger producers evenly over one period.
        next_done[i] = period * (1.0 + i / P)
    ring = np.zeros((P, slots))
    head = np.zeros(P, np.int64)
    cnt = np.zeros(P, np.int64)
    block_start = np.zeros(P)
    hist = np.zeros(P * slots + 1)
    # counters: attempts, discards, produced, consumed, runs_started, runs_done, bad runs,
    # catalyst discards, discarded runs
    c = np.zeros(9, np.int64)
    blocked_time = 0.0
    stall = 0.0
    total = 0
    t = 0.0
    last_change = 0.0
    next_allowed = 0.0
    started = False
    poisoned = False
    first_out = -1.0
    last_out = -1.0
    good_runs_done = 0
    first_bad_run = -1
    ntr = 0
    readies = np.empty(P * slots)
    while True:
        tp = inf
        ip = -1
        for i in range(P):
            if cnt[i] < slots and next_done[i] < tp:
                tp = next_done[i]
                ip = i
        tc = inf
        if total >= inputs:
            if latency > 0:
                k = 0
                for i in range(P):
                    for j in range(cnt[i]):
                        readies[k] = ring[i, (head[i] + j) % slots]
                        k += 1
                tready = np.sort(readies[:k])[inputs - 1]
            else:
                tready = t
            tc = max(next_allowed, tready, t)
        if tp <= tc:
            if tp > horizon:
                break
            t = tp
            c[0] += 1
            if np.random.random() < q:
                c[1] += 1
                next_done[ip] = t + period
            else:
                c[2] += 1
                hist[total] += t - last_change
                last_change = t
                ring[ip, (head[ip] + cnt[ip]) % slots] = t + latency
                cnt[ip] += 1
                total += 1
                if cnt[ip] == slots:
                    block_start[ip] = t
                else:
                    next_done[ip] = t + period
        else:
            if tc > horizon:
                break
            t = tc
            run_stall = 0.0
            if started and t > next_allowed:
                run_stall = t - next_allowed
                stall += run_stall
            started = True
            buffered_before = total
            hist[total] += t - last_change
            last_change = t
            for _ in range(inputs):
                best = -1
                for i in range(P):
                    if cnt[i] == 0:
                        continue
                    r = ring[i, head[i]]
                    if best < 0 or r < ring[best, head[best]] or (
                            r == ring[best, head[best]] and cnt[i] > cnt[best]):
                        best = i
                if cnt[best] == slots:
                    blocked_time += t - block_start[best]
                    next_done[best] = t + period
                head[best] = (head[best] + 1) % slots
                cnt[best] -= 1
                total -= 1
            c[3] += inputs
            c[4] += 1
            u = np.random.random()
            end = t + cperiod
            status = 0
            if u < detect_p:
                status = 2
                c[8] += 1
                if has_catalyst:
                    c[7] += 1
                    poisoned = False
                    next_allowed = end + bootstrap
                else:
                    next_allowed = end
            else:
                next_allowed = end
                if u < detect_p + error_p:
                    status = 1
                    if has_catalyst:
                        poisoned = True
                elif has_catalyst and poisoned:
                    status = 1
            if end <= horizon:
                c[5] += 1
                if status != 2:
                    if first_out < 0:
                        first_out = end
                    last_out = end
                    if status == 1:
                        c[6] += 1
                        if first_bad_run < 0:
                            first_bad_run = good_runs_done
                    good_runs_done += 1
            if ntr < trace.shape[0]:
                trace[ntr, 0] = c[4] - 1
                trace[ntr, 1] = t
                trace[ntr, 2] = end
                trace[ntr, 3] = buffered_before
                trace[ntr, 4] = run_stall
                trace[ntr, 5] = status
                ntr += 1
    end_t = max(horizon, last_change)
    hist[total] += end_t - last_change
    held_count = 0
    for i in range(P):
        if cnt[i] == slots:
            held_count += 1
            blocked_time += end_t - block_start[i]
    return (c, stall, hist, first_out, last_out, good_runs_done, first_bad_run, total - held_count,
            held_count, blocked_time, ntr)


def simulate(config: PipelineConfig, trace_path: Optional[str] = None, trace_limit: int = 1_000_000) -> PipelineStats:
    """Run the event loop up to ``config.horizon_d`` and summarise it.

    ``trace_path`` writes one CSV row per consumer run (up to ``trace_limit`` rows).
    """
    cons = config.consumer
    trace = np.zeros((trace_limit if trace_path else 0, len(TRACE_COLUMNS)))
    (c, stall, hist, first_out, last_out, good_runs, first_bad_run, buffered, held,
     blocked_time, ntr) = _simulate_core(
        config.num_level1, float(config.level1_period_d), float(config.level1_discard_prob),
        config.buffer_capacity, cons.inputs, float(cons.period_d), cons.has_catalyst,
        float(config.ccz_detect_prob), float(config.ccz_error_prob), float(config.bootstrap_delay_d),
        float(config.horizon_d), float(config.routing_latency_d), int(config.seed), trace)
    horizon = config.horizon_d
    if trace_path:
        _write_trace(trace_path, trace[:ntr])
    mean_period = (last_out - first_out) / (good_runs - 1) if good_runs >= 2 else math.nan
    hist_total = hist.sum()
    return PipelineStats(
        outputs_produced=int(good_runs * cons.outputs),
        runs_completed=int(c[5]),
        mean_output_period_d=float(mean_period),
        consumer_stall_fraction=float(stall / horizon) if horizon > 0 else 0.0,
        buffer_occupancy_histogram=[float(h / hist_total) if hist_total > 0 else 0.0 for h in hist],
        catalyst_discard_events=int(c[7]),
        discarded_runs=int(c[8]),
        bad_outputs=int(c[6] * cons.outputs),
        first_bad_output_index=None if first_bad_run < 0 else int(first_bad_run * cons.outputs),
        level1_attempts=int(c[0]),
        level1_discards=int(c[1]),
        level1_produced=int(c[2]),
        inputs_consumed=int(c[3]),
        buffered_at_end=int(buffered),
        held_at_end=int(held),
        producer_blocked_fraction=float(blocked_time / (horizon * config.num_level1)) if horizon > 0 else 0.0,
        horizon_d=float(horizon),
        runs_started=int(c[4]),
    )


def _write_trace(path: str, rows: np.ndarray):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([int(r[0]), f"{r[1]:.6g}", f"{r[2]:.6g}", int(r[3]), f"{r[4]:.6g}",
                        STATUS_NAMES[int(r[5])]])


def level1_effective_period(period_d: float, discard_prob: float) -> float:
    if not 0 <= discard_prob < 1:
        raise ValueError("discard_prob must lie in [0, 1)")
    return period_d / (1 - discard_prob)


def catalyst_error_closed_form(n_runs: int, eps: float) -> dict:
    k = np.arange(1, n_runs + 1)
    return {
        "p_any_bad": float(1 - (1 - eps) ** n_runs),
        "mean_bad_count": float(np.sum(1 - (1 - eps) ** k)),
    }


def catalyst_error_stats(n_runs: int, eps: float, trials: int, seed: int = 0) -> dict:
    """Monte Carlo over catalyst lifetimes of ``n_runs`` runs with per-run CCZ error ``eps``.

    The first erroneous run poisons the catalyst, so it and every later run are bad.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    if trials < 10_000:
        raise ValueError("catalyst_error_stats needs at least 1e4 trials")
    rng = np.random.default_rng(seed)
    if eps == 0:
        first = np.full(trials, n_runs + 1)
    else:
        first = rng.geometric(eps, size=trials)
    bad = np.clip(n_runs - first + 1, 0, None)
    any_bad = bad > 0
    return {
        "p_any_bad": float(any_bad.mean()),
        "p_any_bad_stderr": float(any_bad.std(ddof=1) / math.sqrt(trials)),
        "mean_bad_count": float(bad.mean()),
        "mean_bad_count_stderr": float(bad.std(ddof=1) / math.sqrt(trials)),
        "trials": trials,
    }
