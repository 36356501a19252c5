"""Threshold autoscaler: turns a request-rate series into a node-demand series.

The web tier is modeled analytically: with n instances serving ``rate``
requests/second, CPU utilization is rate / (n * capacity_per_instance),
clamped to 1. One instance is added when the windowed average utilization
exceeds the up-threshold, and one is removed when it falls below
threshold * (n-1) / n, never dropping under the instance floor. The sample
window resets after each action, so consecutive actions are at least one
full window apart.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import CalibrationError
from .traces import DemandSeries, RequestSeries


@dataclass(frozen=True)
class AutoscalerConfig:
    capacity_per_instance: float
    upscale_threshold: float = 0.80
    window: float = 20.0
    tick: float = 1.0
    min_instances: int = 1

    def __post_init__(self):
        if self.capacity_per_instance <= 0:
            raise ValueError("capacity_per_instance must be > 0")
        if not 0 < self.upscale_threshold < 1:
            raise ValueError("upscale_threshold must be in (0, 1)")
        if self.window <= 0 or self.tick <= 0:
            raise ValueError("window and tick must be > 0")
        if self.min_instances < 1:
            raise ValueError("min_instances must be >= 1")


@dataclass(frozen=True)
class ScalerState:
    """Instance count plus the sliding utilization window behind it.

    ``window_start`` marks where the current observation window began (the
    time of the last scaling action, clamped forward by sample eviction); a
    decision is only taken once a full window of history has accumulated.
    """

    n: int
    samples: tuple[tuple[float, float], ...] = ()
    window_start: float = 0.0

    @property
    def last_time(self) -> float:
        return self.samples[-1][0] if self.samples else self.window_start


def initial_state(cfg: AutoscalerConfig, start: float = 0.0) -> ScalerState:
    return ScalerState(n=cfg.min_instances, samples=(), window_start=start)


def utilization(rate: float, n: int, cfg: AutoscalerConfig) -> float:
    """Average per-instance CPU utilization, clamped to 1."""
    if n < 1:
        raise ValueError("instance count must be >= 1")
    if rate < 0:
        raise ValueError("request rate must be >= 0")
    return min(rate / (n * cfg.capacity_per_instance), 1.0)


def step(state: ScalerState, now: float, rate: float, cfg: AutoscalerConfig) -> ScalerState:
    """Advance the scaler by one observation; at most one instance change.

    Pure: returns a new state. ``now`` must be strictly after the previous
    sample.
    """
    if now <= state.last_time and state.samples:
        raise ValueError(f"non-monotone sample time {now} (last was {state.last_time})")
    if now <= state.window_start:
        raise ValueError(f"sample time {now} not after window start {state.window_start}")
    cutoff = now - cfg.window
    kept = tuple(s for s in state.samples if s[0] > cutoff)
    window_start = max(state.window_start, cutoff)
    samples = kept + ((now, utilization(rate, state.n, cfg)),)
    full = now - window_start >= cfg.window
    if full:
        avg = sum(u for _, u in samples) / len(samples)
        if avg > cfg.upscale_threshold:
            return ScalerState(n=state.n + 1, samples=(), window_start=now)
        down_threshold = cfg.upscale_threshold * (state.n - 1) / state.n
        if state.n > cfg.min_instances and avg < down_threshold:
            return ScalerState(n=state.n - 1, samples=(), window_start=now)
    return replace(state, samples=samples, window_start=window_start)


def derive_demand(requests: RequestSeries, cfg: AutoscalerConfig) -> DemandSeries:
    """Simulate the scaler tick-by-tick over a request series.

    Rates interpolate piecewise-constant between samples. Every change in the
    instance count becomes a demand sample; the series starts at
    (0, min_instances). Deterministic for identical inputs.
    """
    state = initial_state(cfg)
    changes: list[tuple[float, int]] = [(0.0, cfg.min_instances)]
    samples = requests.samples
    idx = 0
    rate = samples[0][1]
    i = 1
    while True:
        t = i * cfg.tick
        if t > requests.duration:
            break
        while idx + 1 < len(samples) and samples[idx + 1][0] <= t:
            idx += 1
        rate = samples[idx][1]
        prev_n = state.n
        state = step(state, t, rate, cfg)
        if state.n != prev_n:
            changes.append((t, state.n))
        i += 1
    return DemandSeries(tuple(changes), duration=requests.duration)


def calibrate_capacity(
    requests: RequestSeries,
    target_peak: int,
    cfg: AutoscalerConfig | None = None,
    max_iter: int = 60,
) -> float:
    """Find a per-instance capacity whose derived demand peaks at target_peak.

    Peak demand is non-increasing in capacity, so this bisects; because the
    peak is integer-valued, a whole interval of capacities works and the
    search stops at the first hit.
    """
    if target_peak < 1:
        raise ValueError("target_peak must be >= 1")
    base = cfg or AutoscalerConfig(capacity_per_instance=1.0)
    max_rate = max(r for _, r in requests.samples)
    if max_rate <= 0:
        raise CalibrationError("request series has no load; every capacity yields the floor demand")

    def peak_for(capacity: float) -> int:
        trial = replace(base, capacity_per_instance=capacity)
        return derive_demand(requests, trial).peak()

    # Steady-state guess: peak ~= rate / (threshold * capacity).
    guess = max_rate / (base.upscale_threshold * target_peak)
    p = peak_for(guess)
    if p == target_peak:
        return guess

    if p > target_peak:  # capacity too small; grow until the peak drops past target
        lo = guess
        for _ in range(max_iter):
            hi = lo * 2
            p = peak_for(hi)
            if p == target_peak:
                return hi
            if p < target_peak:
                break
            lo = hi
        else:
            raise CalibrationError(f"could not bracket a capacity reaching peak {target_peak}")
    else:  # capacity too large; shrink until the peak rises past target
        hi = guess
        for _ in range(max_iter):
            lo = hi / 2
            p = peak_for(lo)
            if p == target_peak:
                return lo
            if p > target_peak:
                break
            hi = lo
        else:
            raise CalibrationError(f"could not bracket a capacity reaching peak {target_peak}")

    # peak(lo) > target > peak(hi); bisect until the integer peak lands on target.
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        p = peak_for(mid)
        if p == target_peak:
            return mid
        if p > target_peak:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"no capacity found with peak {target_peak}; the peak skips that value")
