import pytest

from adiabatic_energy import GateCfg
from mtj_device import MtjState
from mtj_lut import MtjSboxLut, WriteOnceViolation, pair_for_bit, sbox_lut_mtj
from present_cipher import SBOX


@pytest.fixture(scope="module")
def lut():
    return sbox_lut_mtj(SBOX)


def test_reads_match_sbox(lut):
    assert [lut.read(x) for x in range(16)] == list(SBOX)


def test_each_read_senses_four_bits(lut):
    read = lut.sense(0xA)
    assert len(read.cycles) == 4
    assert read.value == SBOX[0xA]
    assert read.energy == pytest.approx(sum(c.energy for c in read.cycles))


def test_read_energy_is_uniform_without_imbalance():
    balanced = sbox_lut_mtj(SBOX, gate=GateCfg(residual_imbalance_epsilon=0.0))
    energies = [balanced.sense(x).energy for x in range(16)]
    assert max(energies) == pytest.approx(min(energies), rel=1e-9)


def test_bit_polarity():
    assert pair_for_bit(1) == (MtjState.ANTIPARALLEL, MtjState.PARALLEL)
    assert pair_for_bit(0) == (MtjState.PARALLEL, MtjState.ANTIPARALLEL)
    identity = sbox_lut_mtj(range(16))
    for x in range(16):
        bits = [c.out for c in identity.sense(x).cycles]
        assert bits == [(x >> b) & 1 for b in (3, 2, 1, 0)]


def test_write_once(lut):
    with pytest.raises(WriteOnceViolation):
        lut.program(list(SBOX))


def test_read_before_programming():
    with pytest.raises(RuntimeError, match="before programming"):
        MtjSboxLut().read(0)


@pytest.mark.parametrize("table", [list(range(15)), [0x10] + list(range(15))])
def test_program_must_be_sixteen_nibbles(table):
    with pytest.raises(ValueError, match="16 nibbles"):
        MtjSboxLut().program(table)


def test_read_address_checked(lut):
    with pytest.raises(ValueError, match="nibbles"):
        lut.read(16)
