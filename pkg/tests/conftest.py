import numpy as np
import pytest

from ncma.channel import draw_channel, transmit_slot
from ncma.profiles import encode_slot, get_profile


def random_packets(rng, profile, payload_bits=64):
    return {s: rng.integers(0, 2, payload_bits, dtype=np.uint8) for s in profile.streams}


def simulate_slot(rng, profile, snr_db=(10.0, 10.0, 10.0), model="rayleigh", payload_bits=64,
                  sigma2=1.0, slot=0, antennas=2):
    """One random slot through the channel; returns (observation, packets)."""
    profile = get_profile(profile)
    packets = random_packets(rng, profile, payload_bits)
    users = list(zip(profile.users, snr_db))
    real = draw_channel(users, rng, model, antennas, sigma2 or 1.0)
    obs = transmit_slot(encode_slot(profile, packets), real, rng, sigma2, slot=slot)
    return obs, packets


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
