"""
PRESENT-80 block cipher: S-box layer, bit permutation, key schedule and
encryption, plus the round-1 S-box values a CPA attack targets.

Bit 63 is the most significant bit of the state; nibble 0 is the most
significant nibble, so hex strings read left to right in nibble order.

>>> format(present_encrypt(0x0, 0x0), '016X')
'5579C1387B228445'
"""
import numpy as np

BLOCK_BITS = 64
KEY_BITS = 80
NIBBLES = BLOCK_BITS // 4
MAX_ROUNDS = 31

MASK64 = (1 << BLOCK_BITS) - 1
MASK80 = (1 << KEY_BITS) - 1

#        0    1    2    3    4    5    6    7    8    9    a    b    c    d    e    f
SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)

# Position of bit i after the permutation layer
PBOX = tuple((16 * i) % 63 if i < 63 else 63 for i in range(BLOCK_BITS))

SBOX_ARRAY = np.array(SBOX, dtype=np.uint8)
HAMMING_WEIGHT = np.array([bin(v).count("1") for v in range(16)], dtype=np.uint8)


def sbox(x):
    if not 0 <= x <= 0xF:
        raise ValueError(f"S-box input must be a nibble, got {x}")
    return SBOX[x]


def sbox_layer(state):
    output = 0
    for i in range(NIBBLES):
        output |= SBOX[(state >> (4 * i)) & 0xF] << (4 * i)
    return output


def player(state):
    """Bit permutation layer: bit i moves to (16·i) mod 63, bit 63 stays"""
    output = 0
    for i in range(BLOCK_BITS):
        output |= ((state >> i) & 0x1) << PBOX[i]
    return output


def add_round_key(state, round_key):
    return state ^ round_key


def round_key_of(key):
    """Leftmost 64 bits of the 80-bit key register"""
    return (key >> 16) & MASK64


def key_schedule_round(key, round_counter):
    """Advance the 80-bit key register by one round"""
    if not 1 <= round_counter <= MAX_ROUNDS:
        raise ValueError(f"round_counter must lie in [1, {MAX_ROUNDS}], got {round_counter}")
    # 1. rotate left by 61
    key = ((key << 61) | (key >> 19)) & MASK80
    # 2. S-box on the top nibble
    key = (SBOX[key >> 76] << 76) | (key & ((1 << 76) - 1))
    # 3. round counter into bits 19..15
    return key ^ (round_counter << 15)


def round_keys(key, rounds=MAX_ROUNDS):
    keys = []
    for i in range(1, rounds + 1):
        keys.append(round_key_of(key))
        key = key_schedule_round(key, i)
    keys.append(round_key_of(key))
    return keys


def present_encrypt(pt, key, rounds=MAX_ROUNDS):
    """Encrypt one 64-bit block under an 80-bit key"""
    if not 1 <= rounds <= MAX_ROUNDS:
        raise ValueError(f"rounds must lie in [1, {MAX_ROUNDS}], got {rounds}")
    if not 0 <= pt <= MASK64:
        raise ValueError("plaintext must fit in 64 bits")
    if not 0 <= key <= MASK80:
        raise ValueError("key must fit in 80 bits")
    keys = round_keys(key, rounds)
    state = pt
    for i in range(rounds):
        state = add_round_key(state, keys[i])
        state = sbox_layer(state)
        state = player(state)
    return add_round_key(state, keys[-1])


def nibble(word, index):
    """Nibble `index` of a 64-bit word, 0 being the most significant"""
    return (word >> (4 * (NIBBLES - 1 - index))) & 0xF


def round1_targets(pt, key):
    """(S-box input, S-box output) of every nibble in the first round"""
    state = add_round_key(pt, round_key_of(key))
    targets = []
    for j in range(NIBBLES):
        x = nibble(state, j)
        targets.append((x, SBOX[x]))
    return targets


def nibble_matrix(words):
    """n × 16 matrix of nibbles from an array of 64-bit words"""
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.array([4 * (NIBBLES - 1 - j) for j in range(NIBBLES)], dtype=np.uint64)
    return ((words[:, None] >> shifts[None, :]) & np.uint64(0xF)).astype(np.uint8)


def parse_hex(text, bits):
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    digits = bits // 4
    if len(text) != digits:
        raise ValueError(f"expected {digits} hex characters, got {len(text)}")
    try:
        return int(text, 16)
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}") from None


def parse_state_hex(text):
    return parse_hex(text, BLOCK_BITS)


def parse_key_hex(text):
    return parse_hex(text, KEY_BITS)


def format_state(state):
    return format(state, "016X")


def format_key(key):
    return format(key, "020X")
