"""
Power-trace synthesis for one PRESENT round under either logic family.

Adiabatic-MTJ traces span two clock periods: the key XOR layer on the 0°
power clock, then the 16 MTJ S-box LUT reads on the 90° clock. CMOS traces
span one period with the round register, the XOR layer and each S-box
switching at their own time slots.

Rows are assembled from per-gate current templates produced by the gate
models in adiabatic_energy, weighted by per-trace activity counts, so a row
matches the sum of the individual gate waveforms (see simulate_round).
"""
import logging
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional

import numpy as np

from adiabatic_energy import (
    GateCfg,
    PowerClockCfg,
    adiabatic_xor_cycle,
    cmos_gate_cycle,
    pcsa_cycle,
)
from config import (
    DEFAULT_FLIPFLOPS,
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_SAMPLES_PER_PERIOD,
    DEFAULT_VDD,
    MIN_SAMPLES_PER_PERIOD,
)
from mtj_device import MtjParams, MtjState
from mtj_lut import sbox_lut_mtj
from present_cipher import (
    BLOCK_BITS,
    HAMMING_WEIGHT,
    MASK64,
    MASK80,
    NIBBLES,
    PBOX,
    SBOX,
    SBOX_ARRAY,
    add_round_key,
    format_key,
    nibble,
    nibble_matrix,
    player,
    round_key_of,
    sbox_layer,
)

logger = logging.getLogger(__name__)


class Family(Enum):
    CMOS = "cmos"
    ADIABATIC_MTJ = "adiabatic-mtj"

    @classmethod
    def parse(cls, text):
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown logic family: {text!r} (expected one of {[m.value for m in cls]})")

    @property
    def cycles(self):
        """Clock periods one simulated round occupies"""
        return 2 if self is Family.ADIABATIC_MTJ else 1


@dataclass(frozen=True)
class FamilyCfg:
    """Everything needed to synthesize traces of one logic family"""
    family: Family
    gate: GateCfg = field(default_factory=GateCfg)
    clock: PowerClockCfg = field(default_factory=PowerClockCfg)
    samples_per_period: int = DEFAULT_SAMPLES_PER_PERIOD
    flipflop_count: int = DEFAULT_FLIPFLOPS
    params: MtjParams = field(default_factory=MtjParams)

    def __post_init__(self):
        if self.samples_per_period < MIN_SAMPLES_PER_PERIOD:
            raise ValueError(
                f"samples_per_period must be at least {MIN_SAMPLES_PER_PERIOD}, "
                f"got {self.samples_per_period}"
            )
        if not 0 <= self.flipflop_count <= BLOCK_BITS:
            raise ValueError(f"flipflop_count must lie in [0, {BLOCK_BITS}], got {self.flipflop_count}")
        if self.clock.phase != 0.0:
            raise ValueError("the family clock is the 0° phase; the 90° phase is derived from it")

    @property
    def n_samples(self):
        return self.samples_per_period * self.family.cycles

    @property
    def sense_clock(self):
        """90° clock that drives the LUT sense amplifiers"""
        return replace(self.clock, phase=90.0)

    @property
    def dt(self):
        return self.clock.period / self.samples_per_period


def family_cfg(family, frequency_hz=DEFAULT_FREQUENCY_HZ, samples_per_period=DEFAULT_SAMPLES_PER_PERIOD,
               vdd=DEFAULT_VDD, gate=None, flipflop_count=DEFAULT_FLIPFLOPS):
    """FamilyCfg from the usual command-line knobs"""
    if isinstance(family, str):
        family = Family.parse(family)
    return FamilyCfg(
        family=family,
        gate=gate or GateCfg(),
        clock=PowerClockCfg(frequency=frequency_hz, vdd=vdd),
        samples_per_period=samples_per_period,
        flipflop_count=flipflop_count,
    )


@dataclass
class TraceMeta:
    family: str
    frequency: float
    vdd: float
    samples_per_period: int
    n_traces: int
    n_samples: int
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    seed: int = 0
    key_present: bool = False
    cycles: int = 1

    def __post_init__(self):
        Family.parse(self.family)
        if self.n_samples != self.samples_per_period * self.cycles:
            raise ValueError(
                f"n_samples ({self.n_samples}) must equal samples_per_period × cycles "
                f"({self.samples_per_period} × {self.cycles})"
            )
        if self.n_traces < 0:
            raise ValueError("n_traces must be non-negative")

    @property
    def dt(self):
        return 1.0 / (self.frequency * self.samples_per_period)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = set(cls.__dataclass_fields__)
        unknown = set(data) - names - {'key'}
        if unknown:
            logger.debug("Ignoring unknown metadata fields %s", sorted(unknown))
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass
class TraceSet:
    """Sampled supply current of n encryptions plus their plaintexts"""
    meta: TraceMeta
    plaintexts: np.ndarray
    samples: np.ndarray
    key: Optional[int] = None

    def __post_init__(self):
        self.plaintexts = np.asarray(self.plaintexts, dtype=np.uint64)
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 2:
            raise ValueError("samples must be a 2-D matrix")
        if self.plaintexts.shape != (self.meta.n_traces,):
            raise ValueError(
                f"expected {self.meta.n_traces} plaintexts, got {self.plaintexts.shape[0]}"
            )
        if self.samples.shape != (self.meta.n_traces, self.meta.n_samples):
            raise ValueError(
                f"samples shape {self.samples.shape} does not match "
                f"({self.meta.n_traces}, {self.meta.n_samples})"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("trace samples must be finite")
        if self.key is not None and not 0 <= self.key <= MASK80:
            raise ValueError("key must fit in 80 bits")
        if self.meta.key_present != (self.key is not None):
            raise ValueError("meta.key_present disagrees with the key field")

    def __len__(self):
        return self.meta.n_traces

    @property
    def round_key(self):
        return None if self.key is None else round_key_of(self.key)

    def energies(self):
        """Energy of each trace, Vdd · Σ i · dt (joules)"""
        return self.meta.vdd * self.samples.astype(float).sum(axis=1) * self.meta.dt

    def prefix(self, n):
        """The first n traces as a new TraceSet"""
        if not 1 <= n <= len(self):
            raise ValueError(f"prefix size must lie in [1, {len(self)}], got {n}")
        return TraceSet(meta=replace(self.meta, n_traces=n), plaintexts=self.plaintexts[:n],
                        samples=self.samples[:n], key=self.key)

    def equals(self, other):
        """Equality at the 32-bit storage precision"""
        return (
            self.meta == other.meta
            and self.key == other.key
            and np.array_equal(self.plaintexts, other.plaintexts)
            and np.array_equal(self.samples.astype(np.float32), other.samples.astype(np.float32))
        )

    def describe(self):
        key = format_key(self.key) if self.key is not None else "withheld"
        return (f"{self.meta.family}: {self.meta.n_traces} traces × {self.meta.n_samples} samples "
                f"@ {self.meta.frequency / 1e6:g} MHz, key {key}")


def _bits(word, width):
    """MSB-first bit list"""
    return [(word >> (width - 1 - i)) & 1 for i in range(width)]


def _register_mask(flipflop_count):
    # Flip-flops hold the most significant bits of the round output
    if flipflop_count == 0:
        return 0
    return (MASK64 >> (BLOCK_BITS - flipflop_count)) << (BLOCK_BITS - flipflop_count)


def cmos_event_slots(samples_per_period):
    """Sample index of the XOR layer and of each S-box output switching (register is slot 0)"""
    step = samples_per_period / (NIBBLES + 2)
    xor_slot = int(round(step))
    sbox_slots = [int(round((j + 2) * step)) for j in range(NIBBLES)]
    return xor_slot, sbox_slots


@dataclass
class RoundActivity:
    """Per-gate cycles of one simulated round"""
    sbox_out: int
    round_out: int
    cycles: List[tuple]
    n_cycles: int

    @property
    def energy(self):
        return sum(result.energy for _, result in self.cycles)

    def current_row(self, samples_per_period):
        row = np.zeros(samples_per_period * self.n_cycles)
        for index, result in self.cycles:
            row[index * samples_per_period:(index + 1) * samples_per_period] += result.current
        return row


def simulate_round(pt, key, cfg, prev=0):
    """
    Gate-by-gate reference simulation of one round.

    `prev` is the S-box layer output of the previous encryption on the same
    hardware: the state held by the LUT sense amplifiers or, through the bit
    permutation, by the CMOS round register.
    """
    rk = round_key_of(key)
    y = add_round_key(pt, rk)
    s = sbox_layer(y)
    out = player(s)
    cycles = []
    n = cfg.samples_per_period

    if cfg.family is Family.ADIABATIC_MTJ:
        for a, b in zip(_bits(pt, BLOCK_BITS), _bits(rk, BLOCK_BITS)):
            cycles.append((0, adiabatic_xor_cycle(cfg.gate, cfg.clock, a, b, prev=0,
                                                  samples_per_period=n)))
        lut = sbox_lut_mtj(SBOX, gate=cfg.gate, clock=cfg.sense_clock, params=cfg.params,
                           samples_per_period=n)
        for j in range(NIBBLES):
            read = lut.sense(nibble(y, j), prev=nibble(prev, j))
            if read.value != nibble(s, j):
                raise RuntimeError(f"LUT read mismatch on nibble {j}")
            cycles.extend((1, c) for c in read.cycles)
    else:
        mask = _register_mask(cfg.flipflop_count)
        if cfg.flipflop_count:
            prev_reg = player(prev) & mask
            cycles.append((0, cmos_gate_cycle(cfg.gate, cfg.clock,
                                              _bits(prev_reg, BLOCK_BITS)[:cfg.flipflop_count],
                                              _bits(out & mask, BLOCK_BITS)[:cfg.flipflop_count],
                                              samples_per_period=n, t_event=0.0)))
        xor_slot, sbox_slots = cmos_event_slots(n)
        cycles.append((0, cmos_gate_cycle(cfg.gate, cfg.clock, [0] * BLOCK_BITS, _bits(y, BLOCK_BITS),
                                          samples_per_period=n, t_event=xor_slot * cfg.dt)))
        for j in range(NIBBLES):
            cycles.append((0, cmos_gate_cycle(cfg.gate, cfg.clock, [0] * 4, _bits(nibble(s, j), 4),
                                              samples_per_period=n,
                                              t_event=sbox_slots[j] * cfg.dt)))
    return RoundActivity(sbox_out=s, round_out=out, cycles=cycles, n_cycles=cfg.family.cycles)


def round_energy(pt, key, cfg, prev=0):
    """Total energy of one round summed over the individual gate cycles"""
    return simulate_round(pt, key, cfg, prev).energy


def _player_words(words):
    # Bit permutation over an array of 64-bit words
    out = np.zeros_like(words)
    one = np.uint64(1)
    for i in range(BLOCK_BITS):
        out |= ((words >> np.uint64(i)) & one) << np.uint64(PBOX[i])
    return out


def _popcount_words(words):
    return HAMMING_WEIGHT[nibble_matrix(words)].sum(axis=1).astype(np.int64)


def _words_from_nibbles(nibbles):
    shifts = np.array([4 * (NIBBLES - 1 - j) for j in range(NIBBLES)], dtype=np.uint64)
    return np.bitwise_or.reduce(nibbles.astype(np.uint64) << shifts[None, :], axis=1)


class TraceSynthesizer:
    """Vectorized trace rows from cached per-gate current templates"""

    def __init__(self, cfg):
        self.cfg = cfg
        n = cfg.samples_per_period
        if cfg.family is Family.ADIABATIC_MTJ:
            xor_rest = adiabatic_xor_cycle(cfg.gate, cfg.clock, 0, 0, prev=0, samples_per_period=n)
            xor_move = adiabatic_xor_cycle(cfg.gate, cfg.clock, 1, 0, prev=0, samples_per_period=n)
            pair = (MtjState.PARALLEL, MtjState.ANTIPARALLEL)
            sense_hold = pcsa_cycle(cfg.gate, cfg.sense_clock, *pair, samples_per_period=n,
                                    params=cfg.params, prev=0)
            sense_flip = pcsa_cycle(cfg.gate, cfg.sense_clock, *pair, samples_per_period=n,
                                    params=cfg.params, prev=1)
            self.xor_base = xor_rest.current
            self.xor_delta = xor_move.current - xor_rest.current
            self.sense_base = sense_hold.current
            self.sense_delta = sense_flip.current - sense_hold.current
        else:
            idle = cmos_gate_cycle(cfg.gate, cfg.clock, [0], [0], samples_per_period=n)
            self.leak = idle.current
            xor_slot, sbox_slots = cmos_event_slots(n)
            self.register_spike = self._spike(0)
            self.xor_spike = self._spike(xor_slot)
            self.sbox_spikes = np.stack([self._spike(slot) for slot in sbox_slots])
            self.blocks = 1 + NIBBLES + (1 if cfg.flipflop_count else 0)

    def _spike(self, slot):
        cfg = self.cfg
        toggled = cmos_gate_cycle(cfg.gate, cfg.clock, [0], [1],
                                  samples_per_period=cfg.samples_per_period,
                                  t_event=slot * cfg.dt)
        return toggled.current - self.leak

    def rows(self, plaintexts, key, prev_sbox_out):
        """Noiseless rows for arrays of plaintexts and previous S-box layer outputs"""
        pts = np.asarray(plaintexts, dtype=np.uint64)
        prev = np.asarray(prev_sbox_out, dtype=np.uint64)
        y_words = pts ^ np.uint64(round_key_of(key))
        y = nibble_matrix(y_words)
        s = SBOX_ARRAY[y]
        prev_s = nibble_matrix(prev)
        hw_y = HAMMING_WEIGHT[y].sum(axis=1).astype(float)

        if self.cfg.family is Family.ADIABATIC_MTJ:
            flips = HAMMING_WEIGHT[s ^ prev_s].sum(axis=1).astype(float)
            cycle0 = BLOCK_BITS * self.xor_base + hw_y[:, None] * self.xor_delta
            cycle1 = BLOCK_BITS * self.sense_base + flips[:, None] * self.sense_delta
            return np.hstack([cycle0, cycle1])

        mask = np.uint64(_register_mask(self.cfg.flipflop_count))
        out = _player_words(_words_from_nibbles(s))
        register_hd = _popcount_words((out ^ _player_words(prev)) & mask).astype(float)
        hw_s = HAMMING_WEIGHT[s].astype(float)
        return (self.blocks * self.leak
                + register_hd[:, None] * self.register_spike
                + hw_y[:, None] * self.xor_spike
                + hw_s @ self.sbox_spikes)


@lru_cache(maxsize=8)
def synthesizer_for(cfg):
    return TraceSynthesizer(cfg)


def trace_noise(seed, index, n_samples, sigma):
    """Gaussian noise of trace `index`, drawn from its own (seed, index) substream"""
    if sigma < 0:
        raise ValueError(f"noise sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return np.zeros(n_samples)
    return np.random.default_rng([seed, index]).normal(0.0, sigma, n_samples)


def synthesize_trace(pt, key, cfg, rng=None, noise_sigma=0.0, prev=0):
    """One trace row; `prev` is the previous S-box layer output held by the hardware"""
    if not 0 <= pt <= MASK64:
        raise ValueError("plaintext must fit in 64 bits")
    row = synthesizer_for(cfg).rows([pt], key, [prev])[0]
    if noise_sigma > 0:
        rng = rng if rng is not None else np.random.default_rng()
        row = row + rng.normal(0.0, noise_sigma, row.size)
    return row


def random_plaintexts(n, seed):
    """n uniform 64-bit plaintexts from a seeded generator"""
    halves = np.random.default_rng(seed).integers(0, 1 << 32, size=(n, 2), dtype=np.uint64)
    return (halves[:, 0] << np.uint64(32)) | halves[:, 1]


def random_key(seed):
    hi, lo = np.random.default_rng([seed, 0x4B4559]).integers(0, 1 << 40, size=2, dtype=np.uint64)
    return (int(hi) << 40) | int(lo)


def gen_trace_set(n, key, cfg, seed=0, noise_sigma=DEFAULT_NOISE_SIGMA, include_key=True):
    """
    Deterministic set of n traces for (n, key, cfg, seed).

    Plaintexts come from one seeded stream, noise for trace i from the
    (seed, i) substream, so a noisy set equals its noiseless twin plus
    trace_noise(seed, i, ...) row by row.
    """
    if n < 1:
        raise ValueError(f"trace count must be at least 1, got {n}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if not 0 <= key <= MASK80:
        raise ValueError("key must fit in 80 bits")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")

    plaintexts = random_plaintexts(n, seed)
    sbox_out = _words_from_nibbles(SBOX_ARRAY[nibble_matrix(plaintexts ^ np.uint64(round_key_of(key)))])
    prev = np.concatenate([np.zeros(1, dtype=np.uint64), sbox_out[:-1]])
    samples = synthesizer_for(cfg).rows(plaintexts, key, prev)
    if noise_sigma > 0:
        samples = samples + np.stack([
            trace_noise(seed, i, cfg.n_samples, noise_sigma) for i in range(n)
        ])
    logger.info("Generated %d %s traces of %d samples", n, cfg.family.value, cfg.n_samples)

    meta = TraceMeta(
        family=cfg.family.value,
        frequency=cfg.clock.frequency,
        vdd=cfg.clock.vdd,
        samples_per_period=cfg.samples_per_period,
        n_traces=n,
        n_samples=cfg.n_samples,
        noise_sigma=noise_sigma,
        seed=seed,
        key_present=include_key,
        cycles=cfg.family.cycles,
    )
    return TraceSet(meta=meta, plaintexts=plaintexts, samples=samples,
                    key=key if include_key else None)
