"""
Energy and current models for adiabatic, MTJ sense-amplifier and CMOS gates.

Every gate model returns a CycleResult whose waveform is the supply current
referred to the Vdd rail, sampled on a fixed grid of samples_per_period
points over one clock period. The reported energy is always the waveform
integral Vdd * sum(i) * dt, so per-gate energies and synthesized traces
agree by construction.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from config import (
    DEFAULT_DISCHARGE_FRACTION,
    DEFAULT_EPSILON,
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_LEAKAGE_POWER,
    DEFAULT_LOAD_CAPACITANCE,
    DEFAULT_ON_RESISTANCE,
    DEFAULT_RESOLVE_THRESHOLD,
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_VDD,
    MIN_SAMPLES_PER_PERIOD,
)
from mtj_device import MtjParams, mtj_resistance

logger = logging.getLogger(__name__)

TWO_PHASE_ANGLES = (0.0, 90.0)


class DegenerateRaceError(ValueError):
    """Both sense-amplifier branches hold the same MTJ state"""


class ClockShape(Enum):
    SINUSOIDAL = "sinusoidal"
    TRAPEZOIDAL = "trapezoidal"


@dataclass(frozen=True)
class PowerClockCfg:
    """Power clock driving one adiabatic phase"""
    shape: ClockShape = ClockShape.SINUSOIDAL
    frequency: float = DEFAULT_FREQUENCY_HZ
    vdd: float = DEFAULT_VDD
    phase: float = 0.0
    discharge_fraction: float = DEFAULT_DISCHARGE_FRACTION

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if self.vdd <= 0:
            raise ValueError(f"vdd must be positive, got {self.vdd}")
        if self.phase not in TWO_PHASE_ANGLES:
            raise ValueError(f"phase must be one of {TWO_PHASE_ANGLES}, got {self.phase}")
        if not 0.0 < self.discharge_fraction < 1.0:
            raise ValueError(f"discharge_fraction must lie in (0, 1), got {self.discharge_fraction}")

    @property
    def period(self):
        return 1.0 / self.frequency


@dataclass(frozen=True)
class GateCfg:
    """Electrical configuration shared by the gate models"""
    load_capacitance: float = DEFAULT_LOAD_CAPACITANCE
    on_resistance: float = DEFAULT_ON_RESISTANCE
    residual_imbalance_epsilon: float = DEFAULT_EPSILON
    leakage_power: float = DEFAULT_LEAKAGE_POWER
    resolve_threshold_fraction: float = DEFAULT_RESOLVE_THRESHOLD

    def __post_init__(self):
        if self.load_capacitance <= 0:
            raise ValueError(f"load_capacitance must be positive, got {self.load_capacitance}")
        if self.on_resistance < 0:
            raise ValueError(f"on_resistance must be non-negative, got {self.on_resistance}")
        if not 0.0 <= self.residual_imbalance_epsilon <= 1.0:
            raise ValueError("residual_imbalance_epsilon must lie in [0, 1]")
        if self.leakage_power < 0:
            raise ValueError(f"leakage_power must be non-negative, got {self.leakage_power}")
        if not 0.0 < self.resolve_threshold_fraction < 1.0:
            raise ValueError("resolve_threshold_fraction must lie in (0, 1)")


@dataclass
class CycleResult:
    """Outcome of one gate evaluation: output pair, energy and current waveform"""
    out: int
    out_bar: int
    energy: float
    times: np.ndarray = field(repr=False)
    current: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.out == self.out_bar:
            raise ValueError("out and out_bar must be complementary")
        if self.energy < 0:
            raise ValueError(f"energy must be non-negative, got {self.energy}")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("waveform time points must be strictly increasing")

    @property
    def waveform(self):
        return list(zip(self.times.tolist(), self.current.tolist()))

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])


def adiabatic_transition_energy(r, c, t_period, vdd):
    """Energy dissipated charging C through R with a ramp of length T: (RC/T)·C·V²"""
    if r <= 0:
        raise ValueError(f"resistance must be positive, got {r}")
    if c <= 0:
        raise ValueError(f"capacitance must be positive, got {c}")
    if t_period <= 0:
        raise ValueError(f"t_period must be positive, got {t_period}")
    if vdd < 0:
        raise ValueError(f"vdd must be non-negative, got {vdd}")
    return (r * c / t_period) * c * vdd ** 2


def conventional_switching_energy(c, vdd):
    """½·C·V² dissipated per output transition of a static CMOS gate"""
    if c < 0:
        raise ValueError(f"capacitance must be non-negative, got {c}")
    return 0.5 * c * vdd ** 2


def breakeven_period(r, c):
    """Charging time above which adiabatic switching beats ½CV²"""
    return 2.0 * r * c


def adiabatic_advantage(r, c, t_period):
    """Ratio of conventional to adiabatic dissipation for one transition"""
    return t_period / breakeven_period(r, c)


def two_phase_clocks(frequency=DEFAULT_FREQUENCY_HZ, vdd=DEFAULT_VDD,
                     shape=ClockShape.SINUSOIDAL,
                     discharge_fraction=DEFAULT_DISCHARGE_FRACTION):
    """The 0° and 90° power clocks of the two-phase scheme"""
    return tuple(
        PowerClockCfg(shape=shape, frequency=frequency, vdd=vdd, phase=angle,
                      discharge_fraction=discharge_fraction)
        for angle in TWO_PHASE_ANGLES
    )


def _cycle_fraction(cfg, t):
    # Position inside the clock's own period, in [0, 1)
    return np.mod(np.asarray(t, dtype=float) * cfg.frequency - cfg.phase / 360.0, 1.0)


def _clock_wave(cfg, t):
    u = _cycle_fraction(cfg, t)
    if cfg.shape is ClockShape.SINUSOIDAL:
        return 0.5 * cfg.vdd * (1.0 - np.cos(2.0 * np.pi * u))
    # wait / ramp up / hold / ramp down / wait, ramps a quarter period long
    ramp_up = np.clip((u - 0.125) * 4.0, 0.0, 1.0)
    ramp_down = np.clip((0.875 - u) * 4.0, 0.0, 1.0)
    return cfg.vdd * np.minimum(ramp_up, ramp_down)


def power_clock_sample(cfg, t):
    """Power clock voltage at time t (scalar or array); peaks at Vdd mid-period"""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    v = _clock_wave(cfg, t)
    return float(v) if np.ndim(v) == 0 else v


def _ramp_profile(cfg, t):
    """Squared slope of the clock (dissipation shape) and a rising-edge mask"""
    u = _cycle_fraction(cfg, t)
    if cfg.shape is ClockShape.SINUSOIDAL:
        slope = np.sin(2.0 * np.pi * u)
    else:
        slope = np.where((u >= 0.125) & (u < 0.375), 1.0,
                         np.where((u >= 0.625) & (u < 0.875), -1.0, 0.0))
    return slope ** 2, slope > 0


def _ramp_fraction_elapsed(cfg, tau):
    """Share of a rising ramp's dissipation spent in its first tau seconds"""
    quarter = cfg.period / 4.0
    if cfg.shape is ClockShape.SINUSOIDAL:
        half = 2.0 * quarter
        tau = min(max(tau, 0.0), half)
        omega = 2.0 * np.pi * cfg.frequency
        return float((tau - np.sin(2.0 * omega * tau) / (2.0 * omega)) / half)
    return min(max(tau, 0.0) / quarter, 1.0)


def sample_times(cfg, samples_per_period):
    if samples_per_period < MIN_SAMPLES_PER_PERIOD:
        raise ValueError(
            f"samples_per_period must be at least {MIN_SAMPLES_PER_PERIOD}, got {samples_per_period}"
        )
    return np.arange(samples_per_period) * (cfg.period / samples_per_period)


def integrate_energy(current, vdd, dt):
    """Vdd · Σ i · dt over a periodic grid"""
    return float(vdd * np.sum(current) * dt)


def _spread(energy, weight, vdd, dt):
    # Current with the given shape whose integral is exactly `energy`
    total = float(np.sum(weight))
    if energy == 0 or total == 0:
        return np.zeros_like(weight, dtype=float)
    return weight * (energy / (vdd * dt * total))


def _imbalance(cfg, out, prev):
    eps = cfg.residual_imbalance_epsilon
    return 1.0 + eps / 2.0 if out != prev else 1.0 - eps / 2.0


def _check_bit(name, value):
    if value not in (0, 1):
        raise ValueError(f"{name} must be a bit, got {value!r}")


def pcsa_cycle(cfg, clock, branch_true_mtj, branch_comp_mtj,
               samples_per_period=DEFAULT_SAMPLES_PER_PERIOD, params=None, prev=0):
    """
    One evaluate/discharge cycle of the pre-charged sense amplifier.

    The node above the parallel (faster) branch resolves to 0. Both branches
    conduct until that node has moved resolve_threshold_fraction·Vdd, so the
    dissipated energy only depends on the pair {R_P, R_AP}, not on which
    branch holds which state. `prev` is the previous decision of the same
    amplifier; the residual imbalance follows whether the decision toggles.
    """
    if branch_true_mtj == branch_comp_mtj:
        raise DegenerateRaceError(
            f"both branches are {branch_true_mtj.value}; a dual-rail pair must be complementary"
        )
    _check_bit("prev", prev)
    params = params or MtjParams()
    times = sample_times(clock, samples_per_period)
    dt = clock.period / samples_per_period

    r_true = mtj_resistance(branch_true_mtj, params)
    r_comp = mtj_resistance(branch_comp_mtj, params)
    out = 0 if r_true < r_comp else 1
    r_win, r_lose = min(r_true, r_comp), max(r_true, r_comp)
    c = cfg.load_capacitance

    cycle_energy = adiabatic_transition_energy(r_win, c, clock.period, clock.vdd)
    # Losing branch conducts until the winner crosses the trip point
    t_resolve = -r_win * c * math.log(1.0 - cfg.resolve_threshold_fraction)
    race_energy = (adiabatic_transition_energy(r_lose, c, clock.period, clock.vdd)
                   * (1.0 - clock.discharge_fraction)
                   * _ramp_fraction_elapsed(clock, t_resolve))
    dynamic = (cycle_energy + race_energy) * _imbalance(cfg, out, prev)

    weight, rising = _ramp_profile(clock, times)
    evaluate = _spread(dynamic * (1.0 - clock.discharge_fraction), np.where(rising, weight, 0.0),
                       clock.vdd, dt)
    discharge = _spread(dynamic * clock.discharge_fraction, np.where(rising, 0.0, weight),
                        clock.vdd, dt)
    current = evaluate + discharge
    return CycleResult(out=out, out_bar=1 - out,
                       energy=integrate_energy(current, clock.vdd, dt),
                       times=times, current=current)


def adiabatic_xor_cycle(cfg, clock, a, b, prev, samples_per_period=DEFAULT_SAMPLES_PER_PERIOD):
    """Dual-rail adiabatic XOR treated as a single RC load on the power clock"""
    _check_bit("a", a)
    _check_bit("b", b)
    _check_bit("prev", prev)
    times = sample_times(clock, samples_per_period)
    dt = clock.period / samples_per_period
    out = a ^ b

    if cfg.on_resistance == 0:
        # ideal switch: the ramp recovers all of the charge
        dynamic = 0.0
    else:
        dynamic = adiabatic_transition_energy(cfg.on_resistance, cfg.load_capacitance,
                                              clock.period, clock.vdd)
        dynamic *= _imbalance(cfg, out, prev)
    weight, _ = _ramp_profile(clock, times)
    current = _spread(dynamic, weight, clock.vdd, dt) + cfg.leakage_power / clock.vdd
    return CycleResult(out=out, out_bar=1 - out,
                       energy=integrate_energy(current, clock.vdd, dt),
                       times=times, current=current)


def spike_profile(cfg, clock, samples_per_period, t_event=0.0):
    """Charge fraction per sample bin of an RC spike starting at t_event (sums to 1)"""
    dt = clock.period / samples_per_period
    edges = np.arange(samples_per_period + 1) * dt
    tau = cfg.on_resistance * cfg.load_capacitance
    if tau == 0:
        frac = ((edges[:-1] <= t_event) & (t_event < edges[1:])).astype(float)
    else:
        # bins before the event collapse to zero width
        start = np.maximum(edges[:-1], t_event)
        stop = np.maximum(edges[1:], t_event)
        frac = np.exp(-(start - t_event) / tau) - np.exp(-(stop - t_event) / tau)
    total = frac.sum()
    if total == 0:
        # Event at the very end of the period lands in the last bin
        frac = np.zeros(samples_per_period)
        frac[-1] = 1.0
        return frac
    return frac / total


def cmos_gate_cycle(cfg, clock, prev_bits, new_bits,
                    samples_per_period=DEFAULT_SAMPLES_PER_PERIOD, t_event=0.0):
    """
    Static CMOS block moving its output nodes from prev_bits to new_bits.

    Each toggled node costs ½CV² and appears as an exponentially decaying
    spike (time constant R_on·C) starting at t_event. CMOS is single-rail, so
    out mirrors the leading bit of new_bits.
    """
    prev_bits = np.asarray(prev_bits, dtype=np.uint8)
    new_bits = np.asarray(new_bits, dtype=np.uint8)
    if prev_bits.shape != new_bits.shape:
        raise ValueError(f"bitvector length mismatch: {prev_bits.size} vs {new_bits.size}")
    times = sample_times(clock, samples_per_period)
    dt = clock.period / samples_per_period

    toggles = int(np.count_nonzero(prev_bits != new_bits))
    charge = toggles * conventional_switching_energy(cfg.load_capacitance, clock.vdd) / clock.vdd
    current = (charge / dt) * spike_profile(cfg, clock, samples_per_period, t_event)
    current = current + cfg.leakage_power / clock.vdd
    out = int(new_bits[0]) if new_bits.size else 0
    return CycleResult(out=out, out_bar=1 - out,
                       energy=integrate_energy(current, clock.vdd, dt),
                       times=times, current=current)
