"""Event-rate power accounting: static leakage plus per-event charge.

Because the link wakes only to move a word and sleeps instantly after,
supply current is affine in the event rate: I(r) = I_leak + Q_event * r.
The per-event charges are fitted to the measured peak-rate currents and
validated against the 10 kEvents/s operating point; the floors are the
measured off-leakage levels. Current in amperes is the primary unit;
power in watts is derived through the supply voltage.
"""

from __future__ import annotations

from dataclasses import dataclass

TX = "tx"
RX = "rx"

# Peak sustained event rate of the default link calibration:
# 1e12 / ((6 + 32) * 670 + 2400) ps.
DEFAULT_PEAK_RATE_EPS = 1e12 / 27_860


class RateError(ValueError):
    """Requested rate above the peak the link can sustain."""


@dataclass(frozen=True)
class PowerParams:
    """Leakage floors (A), per-event charges (C), and supply voltage (V)."""

    i_leak_tx: float = 80e-9
    i_leak_rx: float = 42e-9
    q_event_tx: float = 0.54e-9
    q_event_rx: float = 0.100e-9
    vdd: float = 1.8

    def __post_init__(self) -> None:
        for name in ("i_leak_tx", "i_leak_rx", "q_event_tx", "q_event_rx", "vdd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def floor(self, side: str) -> float:
        return self.i_leak_tx if side == TX else self.i_leak_rx

    def charge(self, side: str) -> float:
        return self.q_event_tx if side == TX else self.q_event_rx


def current_at_rate(
    rate_eps: float,
    side: str,
    params: PowerParams | None = None,
    peak_rate_eps: float = DEFAULT_PEAK_RATE_EPS,
) -> float:
    """Supply current (A) of one side at the given event rate."""
    if side not in (TX, RX):
        raise ValueError(f"side must be {TX!r} or {RX!r}, got {side!r}")
    if rate_eps < 0:
        raise RateError("rate must be non-negative")
    if rate_eps > peak_rate_eps:
        raise RateError(
            f"rate {rate_eps:.4g} events/s exceeds the peak {peak_rate_eps:.4g} events/s"
        )
    p = params if params is not None else PowerParams()
    return p.floor(side) + p.charge(side) * rate_eps


def charge_per_bit(params: PowerParams, side: str, width: int = 32, n_lsb_repeat: int = 6) -> float:
    """Derived view: per-event charge spread over the bits on the wire."""
    return params.charge(side) / (width + n_lsb_repeat)


@dataclass(frozen=True)
class PowerSummary:
    p_max_amps: float
    p_min_amps: float
    ratio: float


def summary_ratios(
    params: PowerParams | None = None,
    peak_rate_eps: float = DEFAULT_PEAK_RATE_EPS,
) -> PowerSummary:
    """Total current at peak rate, total leakage floor, and their ratio."""
    p = params if params is not None else PowerParams()
    p_max = current_at_rate(peak_rate_eps, TX, p, peak_rate_eps) + current_at_rate(
        peak_rate_eps, RX, p, peak_rate_eps
    )
    p_min = p.i_leak_tx + p.i_leak_rx
    return PowerSummary(p_max, p_min, p_max / p_min)


@dataclass(frozen=True)
class TraceEnergy:
    duration_s: float
    rate_eps: float
    avg_current_tx: float
    avg_current_rx: float
    energy_joules: float


def energy_of_trace(stats, params: PowerParams | None = None) -> TraceEnergy:
    """Energy and average current of a completed run.

    `stats` needs `events_received` and `sim_time_ps`. By linearity the
    average current equals current_at_rate at the observed rate exactly.
    """
    p = params if params is not None else PowerParams()
    duration_s = stats.sim_time_ps * 1e-12
    if duration_s <= 0:
        raise ValueError("run has zero duration")
    rate = stats.events_received / duration_s
    i_tx = p.i_leak_tx + p.q_event_tx * rate
    i_rx = p.i_leak_rx + p.q_event_rx * rate
    energy = p.vdd * (i_tx + i_rx) * duration_s
    return TraceEnergy(duration_s, rate, i_tx, i_rx, energy)
