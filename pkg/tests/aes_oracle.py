"""Table-free AES-128 in CTR mode, transcribed from FIPS 197 / SP 800-38A.

A second, deliberately naive implementation of the cipher used by the
library.  The S-box is computed from the field inverse at import time, so
nothing here is copied from the code under test.
"""

from __future__ import annotations


def _xtime(a: int) -> int:
    a <<= 1
    if a & 0x100:
        a ^= 0x11B
    return a & 0xFF


def _gmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = _xtime(a)
        b >>= 1
    return out


def _build_sbox() -> list[int]:
    # Multiplicative inverse in GF(2^8) followed by the affine map.
    inv = [0] * 256
    for x in range(1, 256):
        for y in range(1, 256):
            if _gmul(x, y) == 1:
                inv[x] = y
                break
    sbox = []
    for x in range(256):
        b = inv[x]
        v = 0x63  # affine constant; inverse(0) = 0 maps straight to 0x63
        for i in range(8):
            bit = (
                (b >> i) ^ (b >> ((i + 4) % 8)) ^ (b >> ((i + 5) % 8))
                ^ (b >> ((i + 6) % 8)) ^ (b >> ((i + 7) % 8))
            ) & 1
            v ^= bit << i
        sbox.append(v)
    return sbox


_SBOX = _build_sbox()
_RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36]


def _expand_key(key: bytes) -> list[list[int]]:
    assert len(key) == 16
    words = [list(key[i : i + 4]) for i in range(0, 16, 4)]
    for i in range(4, 44):
        temp = list(words[i - 1])
        if i % 4 == 0:
            temp = temp[1:] + temp[:1]
            temp = [_SBOX[b] for b in temp]
            temp[0] ^= _RCON[i // 4 - 1]
        words.append([a ^ b for a, b in zip(words[i - 4], temp)])
    return [sum(words[i : i + 4], []) for i in range(0, 44, 4)]


def _sub_bytes(state: list[int]) -> list[int]:
    return [_SBOX[b] for b in state]


def _shift_rows(state: list[int]) -> list[int]:
    # Column-major state: byte r,c sits at state[4*c + r].
    out = list(state)
    for r in range(1, 4):
        row = [state[4 * c + r] for c in range(4)]
        row = row[r:] + row[:r]
        for c in range(4):
            out[4 * c + r] = row[c]
    return out


def _mix_columns(state: list[int]) -> list[int]:
    out = []
    for c in range(4):
        col = state[4 * c : 4 * c + 4]
        out.extend(
            [
                _gmul(col[0], 2) ^ _gmul(col[1], 3) ^ col[2] ^ col[3],
                col[0] ^ _gmul(col[1], 2) ^ _gmul(col[2], 3) ^ col[3],
                col[0] ^ col[1] ^ _gmul(col[2], 2) ^ _gmul(col[3], 3),
                _gmul(col[0], 3) ^ col[1] ^ col[2] ^ _gmul(col[3], 2),
            ]
        )
    return out


def _add_round_key(state: list[int], round_key: list[int]) -> list[int]:
    return [a ^ b for a, b in zip(state, round_key)]


def aes128_encrypt_block(key: bytes, block: bytes) -> bytes:
    assert len(block) == 16
    round_keys = _expand_key(key)
    state = _add_round_key(list(block), round_keys[0])
    for rnd in range(1, 10):
        state = _mix_columns(_shift_rows(_sub_bytes(state)))
        state = _add_round_key(state, round_keys[rnd])
    state = _add_round_key(_shift_rows(_sub_bytes(state)), round_keys[10])
    return bytes(state)


def aes128_ctr_reference(key: bytes, initial_counter: bytes, data: bytes) -> bytes:
    """CTR keystream XOR, big-endian increment over the whole 16-byte block."""
    assert len(initial_counter) == 16
    counter = int.from_bytes(initial_counter, "big")
    out = bytearray()
    for offset in range(0, len(data), 16):
        chunk = data[offset : offset + 16]
        keystream = aes128_encrypt_block(
            key, (counter % (1 << 128)).to_bytes(16, "big")
        )
        out.extend(a ^ b for a, b in zip(chunk, keystream))
        counter += 1
    return bytes(out)
