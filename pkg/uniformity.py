"""
Energy uniformity of the S-box: NED and NSD over every input (MTJ LUT)
or every input transition (CMOS).
"""
import logging
from dataclasses import asdict, dataclass
from itertools import product
from typing import List, Optional

import numpy as np
import pandas as pd

from adiabatic_energy import cmos_gate_cycle
from config import FAMILIES, SBOX_UNIFORMITY_REFERENCE
from mtj_lut import sbox_lut_mtj
from present_cipher import SBOX
from trace_lab import Family, family_cfg

logger = logging.getLogger(__name__)

FEMTO = 1e15


def _energies(energies):
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("energy list is empty")
    if np.any(e < 0):
        raise ValueError("energies must be non-negative")
    return e


def ned(energies):
    """Normalized energy deviation (E_max - E_min) / E_max"""
    e = _energies(energies)
    e_max = e.max()
    if e_max == 0:
        raise ValueError("NED is undefined when every energy is zero")
    return float((e_max - e.min()) / e_max)


def nsd(energies):
    """Population standard deviation over the mean"""
    e = _energies(energies)
    mean = e.mean()
    if mean <= 0:
        raise ValueError("NSD is undefined for a zero mean")
    return float(e.std() / mean)


@dataclass
class EnergyReport:
    energies: List[float]
    e_min: float
    e_max: float
    e_avg: float
    ned: float
    nsd: float
    label: Optional[str] = None

    def __post_init__(self):
        if not self.e_min <= self.e_avg <= self.e_max:
            raise ValueError("report extremes must bracket the average")
        if self.ned < 0 or self.nsd < 0:
            raise ValueError("NED and NSD are non-negative")

    @classmethod
    def from_energies(cls, energies, label=None):
        e = _energies(energies)
        e_min, e_max = float(e.min()), float(e.max())
        # mean of equal floats may round just outside [min, max]
        e_avg = min(max(float(e.mean()), e_min), e_max)
        return cls(energies=e.tolist(), e_min=e_min, e_max=e_max, e_avg=e_avg,
                   ned=ned(e), nsd=nsd(e), label=label)

    def summary(self):
        """Table-style row in fJ and percent"""
        return {
            'family': self.label,
            'e_min_fj': self.e_min * FEMTO,
            'e_max_fj': self.e_max * FEMTO,
            'e_avg_fj': self.e_avg * FEMTO,
            'ned_pct': 100.0 * self.ned,
            'nsd_pct': 100.0 * self.nsd,
        }

    def to_dict(self):
        return asdict(self)


def _nibble_bits(x):
    return [(x >> (3 - i)) & 1 for i in range(4)]


def sbox_inputs(family):
    """Exhaustive input set: 16 addresses, or 256 (previous, next) input pairs for CMOS"""
    if family is Family.ADIABATIC_MTJ:
        return list(range(16))
    return list(product(range(16), repeat=2))


def energy_report(cfg, inputs=None):
    """Per-input S-box energies of one family from the gate models"""
    inputs = list(inputs) if inputs is not None else sbox_inputs(cfg.family)
    if not inputs:
        raise ValueError("input set is empty")

    if cfg.family is Family.ADIABATIC_MTJ:
        lut = sbox_lut_mtj(SBOX, gate=cfg.gate, clock=cfg.sense_clock, params=cfg.params,
                           samples_per_period=cfg.samples_per_period)
        energies = [lut.sense(x).energy for x in inputs]
    else:
        energies = []
        for prev, x in inputs:
            # input and output nodes of one S-box instance
            before = _nibble_bits(prev) + _nibble_bits(SBOX[prev])
            after = _nibble_bits(x) + _nibble_bits(SBOX[x])
            energies.append(cmos_gate_cycle(cfg.gate, cfg.clock, before, after,
                                            samples_per_period=cfg.samples_per_period).energy)
    report = EnergyReport.from_energies(energies, label=cfg.family.value)
    logger.debug("%s S-box: NED %.3f%%, NSD %.3f%%", cfg.family.value,
                 100 * report.ned, 100 * report.nsd)
    return report


def compare_sbox_uniformity(frequency_hz=None, samples_per_period=None, gate=None):
    """Uniformity of both S-box implementations next to the reference values"""
    kwargs = {}
    if frequency_hz is not None:
        kwargs['frequency_hz'] = frequency_hz
    if samples_per_period is not None:
        kwargs['samples_per_period'] = samples_per_period
    rows = []
    for family in (Family.ADIABATIC_MTJ, Family.CMOS):
        report = energy_report(family_cfg(family, gate=gate, **kwargs))
        row = report.summary()
        row['label'] = FAMILIES[family.value]['label']
        reference = SBOX_UNIFORMITY_REFERENCE[family.value]
        row['ref_ned_pct'] = reference['ned']
        row['ref_nsd_pct'] = reference['nsd']
        rows.append(row)
    return pd.DataFrame(rows)
