import struct

import numpy as np
import pytest

from rankone import cache
from rankone.errors import IntegrityError
from rankone.mobius import mobius_sieve


def test_header_and_bit_layout():
    blob = cache.dumps(mobius_sieve(10))
    assert blob[:4] == b"RQMU" and blob[4] == 1
    assert struct.unpack("<Q", blob[5:13])[0] == 10
    payload = blob[13:]
    assert len(payload) == 3
    # mu(1..4) = +1, -1, -1, 0 -> codes 01, 10, 10, 00 from the low pair up
    assert payload[0] == 0b00_10_10_01
    # mu(5..8) = -1, +1, -1, 0
    assert payload[1] == 0b00_10_01_10
    # mu(9..10) = 0, +1, then zero padding
    assert payload[2] == 0b00_00_01_00


@pytest.mark.parametrize("limit", [1, 2, 3, 4, 5, 1000, 4097])
def test_round_trip(tmp_path, limit):
    table = mobius_sieve(limit)
    path = cache.write_cache(table, tmp_path / "mu.rqmu")
    back = cache.read_cache(path)
    assert back == table
    assert cache.dumps(back) == path.read_bytes()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda b: b"XQMU" + b[4:],
        lambda b: b[:4] + b"\x02" + b[5:],
        lambda b: b[:-1],
        lambda b: b + b"\x00",
        lambda b: b[:8],
        lambda b: b[:13] + b"\xff" + b[14:],
    ],
    ids=["magic", "version", "truncated", "extended", "short-header", "reserved-code"],
)
def test_corruption_is_rejected(mutate):
    blob = cache.dumps(mobius_sieve(100))
    with pytest.raises(IntegrityError):
        cache.loads(mutate(blob))


def test_encode_decode_inverse():
    vals = np.array([1, -1, 0, 0, 1, -1, -1], dtype=np.int8)
    assert np.array_equal(cache.decode_codes(cache.encode_codes(vals), vals.size), vals)
