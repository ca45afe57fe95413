"""
Write-once look-up table built from complementary MTJ pairs.

Each output bit of each entry is stored as a (true, complement) pair of
junctions in opposite states and read back through a pre-charged sense
amplifier. Reading never switches an MTJ, so the table is programmed once
and is read-only afterwards.
"""
import logging
from dataclasses import dataclass
from typing import List

from adiabatic_energy import GateCfg, PowerClockCfg, pcsa_cycle
from config import DEFAULT_SAMPLES_PER_PERIOD
from mtj_device import MtjParams, MtjState

logger = logging.getLogger(__name__)

OUTPUT_BITS = 4


class WriteOnceViolation(RuntimeError):
    """Raised when an already programmed LUT is written again"""


@dataclass
class LutRead:
    value: int
    cycles: list

    @property
    def energy(self):
        return sum(c.energy for c in self.cycles)


def pair_for_bit(bit):
    """(true branch, complement branch) storing `bit`; 1 puts the AP junction on the true side"""
    true_side = MtjState.ANTIPARALLEL if bit else MtjState.PARALLEL
    return true_side, true_side.flipped()


class MtjSboxLut:
    """4-bit to 4-bit LUT sensed one output bit per amplifier"""

    def __init__(self, gate=None, clock=None, params=None,
                 samples_per_period=DEFAULT_SAMPLES_PER_PERIOD):
        self.gate = gate or GateCfg()
        self.clock = clock or PowerClockCfg()
        self.params = params or MtjParams()
        self.samples_per_period = samples_per_period
        self._cells = None

    @property
    def programmed(self):
        return self._cells is not None

    def program(self, table: List[int]):
        """Write the 16 entries; allowed exactly once"""
        if self.programmed:
            raise WriteOnceViolation("MTJ LUT is write-once and already programmed")
        if len(table) != 16 or any(not 0 <= v <= 0xF for v in table):
            raise ValueError("LUT program must be 16 nibbles")
        self._cells = tuple(
            tuple(pair_for_bit((value >> b) & 1) for b in reversed(range(OUTPUT_BITS)))
            for value in table
        )
        logger.debug("Programmed MTJ LUT with %s", [format(v, 'X') for v in table])
        return self

    def sense(self, x, prev=0):
        """Read entry x; `prev` is the previous value held by the sense amplifiers"""
        if not self.programmed:
            raise RuntimeError("MTJ LUT read before programming")
        if not 0 <= x <= 0xF or not 0 <= prev <= 0xF:
            raise ValueError("LUT address and previous value must be nibbles")
        cycles = []
        value = 0
        for position, (true_state, comp_state) in enumerate(self._cells[x]):
            shift = OUTPUT_BITS - 1 - position
            result = pcsa_cycle(self.gate, self.clock, true_state, comp_state,
                                samples_per_period=self.samples_per_period,
                                params=self.params, prev=(prev >> shift) & 1)
            value |= result.out << shift
            cycles.append(result)
        return LutRead(value=value, cycles=cycles)

    def read(self, x, prev=0):
        return self.sense(x, prev).value


def sbox_lut_mtj(program, gate=None, clock=None, params=None,
                 samples_per_period=DEFAULT_SAMPLES_PER_PERIOD):
    """Build and program an MTJ LUT in one step"""
    lut = MtjSboxLut(gate=gate, clock=clock, params=params,
                     samples_per_period=samples_per_period)
    return lut.program(list(program))
