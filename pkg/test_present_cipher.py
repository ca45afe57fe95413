import time

import numpy as np
import pytest

from present_cipher import (
    MASK64,
    MASK80,
    PBOX,
    SBOX,
    add_round_key,
    format_key,
    format_state,
    key_schedule_round,
    nibble,
    nibble_matrix,
    parse_key_hex,
    parse_state_hex,
    player,
    present_encrypt,
    round1_targets,
    round_key_of,
    round_keys,
    sbox,
    sbox_layer,
)

INV_SBOX = tuple(SBOX.index(v) for v in range(16))


def inv_sbox_layer(state):
    out = 0
    for i in range(16):
        out |= INV_SBOX[(state >> (4 * i)) & 0xF] << (4 * i)
    return out


def inv_player(state):
    out = 0
    for i in range(64):
        out |= ((state >> PBOX[i]) & 1) << i
    return out


def decrypt(ct, key, rounds=31):
    keys = round_keys(key, rounds)
    state = add_round_key(ct, keys[-1])
    for i in reversed(range(rounds)):
        state = inv_player(state)
        state = inv_sbox_layer(state)
        state = add_round_key(state, keys[i])
    return state


KNOWN_ANSWERS = [
    (0x0, 0x0, 0x5579C1387B228445),
    (0x0, MASK80, 0xE72C46C0F5945049),
    (MASK64, 0x0, 0xA112FFC72F68417B),
    (MASK64, MASK80, 0x3333DCD3213210D2),
]


@pytest.mark.parametrize("pt, key, ct", KNOWN_ANSWERS)
def test_known_answer_vectors(pt, key, ct):
    assert present_encrypt(pt, key) == ct
    assert decrypt(ct, key) == pt


@pytest.mark.slow
def test_known_answer_vectors_run_within_a_second():
    start = time.perf_counter()
    assert [present_encrypt(pt, key) for pt, key, _ in KNOWN_ANSWERS] == [ct for _, _, ct in KNOWN_ANSWERS]
    assert time.perf_counter() - start < 1.0


def test_sbox_table():
    assert sbox(0x0) == 0xC
    assert sbox(0xF) == 0x2
    assert sorted(SBOX) == list(range(16))
    with pytest.raises(ValueError, match="nibble"):
        sbox(16)


def test_player_positions():
    assert player(1 << 0) == 1 << 0
    assert player(1 << 63) == 1 << 63
    assert player(1 << 1) == 1 << 16
    assert sorted(PBOX) == list(range(64))


def test_layers_invert():
    rng = np.random.default_rng(3)
    for word in rng.integers(0, 1 << 63, size=20, dtype=np.uint64):
        s = int(word) << 1 | 1
        assert inv_player(player(s)) == s
        assert inv_sbox_layer(sbox_layer(s)) == s


def test_add_round_key_properties():
    s, k = 0x0123456789ABCDEF, 0xFEDCBA9876543210
    assert add_round_key(s, 0) == s
    assert add_round_key(s, s) == 0
    assert add_round_key(add_round_key(s, k), k) == s


def test_zero_key_schedule():
    keys = round_keys(0, 3)
    assert keys[:3] == [0x0, 0xC000000000000000, 0x5000180000000001]


def test_key_schedule_round_counter_range():
    with pytest.raises(ValueError, match="round_counter"):
        key_schedule_round(0, 0)
    with pytest.raises(ValueError, match="round_counter"):
        key_schedule_round(0, 32)


def test_key_schedule_rotation_is_invertible():
    key = 0x0123456789ABCDEF0123
    updated = key_schedule_round(key, 5)
    # undo counter, S-box and rotation
    updated ^= 5 << 15
    updated = (INV_SBOX[updated >> 76] << 76) | (updated & ((1 << 76) - 1))
    restored = ((updated >> 61) | (updated << 19)) & MASK80
    assert restored == key


def test_one_round_decomposition():
    pt, key = 0x0123456789ABCDEF, 0x00112233445566778899
    keys = round_keys(key, 1)
    manual = add_round_key(player(sbox_layer(add_round_key(pt, keys[0]))), keys[1])
    assert present_encrypt(pt, key, rounds=1) == manual


@pytest.mark.parametrize("rounds", [0, 32])
def test_rounds_range(rounds):
    with pytest.raises(ValueError, match="rounds"):
        present_encrypt(0, 0, rounds=rounds)


def test_round1_targets_zero():
    assert round1_targets(0, 0) == [(0, 0xC)] * 16


def test_round1_targets_match_first_round_state():
    pt, key = 0xDEADBEEF01234567, 0x89ABCDEF0123456789AB
    sbox_in = add_round_key(pt, round_key_of(key))
    sbox_out = sbox_layer(sbox_in)
    targets = round1_targets(pt, key)
    assert [x for x, _ in targets] == [nibble(sbox_in, j) for j in range(16)]
    assert [y for _, y in targets] == [nibble(sbox_out, j) for j in range(16)]


def test_round1_targets_locality():
    pt, key = 0x0123456789ABCDEF, 0xFEDCBA98765432100000
    delta = 0xA << 4 * 13
    assert round1_targets(pt ^ delta, key ^ (delta << 16)) == round1_targets(pt, key)
    changed = round1_targets(pt ^ (0x1 << 4 * 15), key)
    assert changed[1:] == round1_targets(pt, key)[1:]


def test_nibble_matrix_matches_scalar():
    words = [0x0123456789ABCDEF, MASK64, 0]
    matrix = nibble_matrix(words)
    assert matrix.shape == (3, 16)
    for row, word in zip(matrix, words):
        assert row.tolist() == [nibble(word, j) for j in range(16)]


def test_hex_round_trip_and_errors():
    assert parse_state_hex("0x5579C1387B228445") == 0x5579C1387B228445
    assert format_state(0xAB) == "00000000000000AB"
    assert format_key(parse_key_hex("FFFFFFFFFFFFFFFFFFFF")) == "FFFFFFFFFFFFFFFFFFFF"
    with pytest.raises(ValueError, match="20 hex"):
        parse_key_hex("00")
    with pytest.raises(ValueError, match="not a hex"):
        parse_state_hex("zz00000000000000")
