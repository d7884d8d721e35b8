import math

import numpy as np
import pytest

from irs_tiles import (
    AnglePair,
    AngleTriple,
    ArrayGeometry,
    ChannelScenario,
    Codebook,
    DirectPath,
    IncidentPath,
    IrsLayout,
    OutgoingPath,
    TileSpec,
    TransmissionMode,
    WaveSpec,
)

ACCEPTANCE_LINES = []

STEER_TILE = TileSpec(10.0, 10.0, 0.5)
UNIT_WAVE = WaveSpec(1.0)


def random_triple(rng, max_theta=0.45 * math.pi):
    return AngleTriple(rng.uniform(0, max_theta), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))


def random_pair(rng, max_theta=0.5 * math.pi):
    return AnglePair(rng.uniform(0, max_theta), rng.uniform(0, 2 * math.pi))


def random_mode(rng, scale=1.0):
    return TransmissionMode(*(scale * rng.uniform(-1, 1, size=3)))


def random_gain(rng):
    return complex(rng.normal(), rng.normal())


def random_scenario(rng, n_tiles, n_modes, n_tx=1, n_rx=2, max_paths=2, discrete=False):
    """Small randomized scenario with every path table present."""
    wave = WaveSpec(1.0)
    L = float(rng.choice([1.0, 2.0, 3.0]))
    lattice = None
    if discrete:
        from irs_tiles import DiscreteLattice
        lattice = DiscreteLattice.for_tile(TileSpec(L, L), 0.5)
    keys = set()
    while len(keys) < n_tiles:
        keys.add((int(rng.integers(-2, 3)), int(rng.integers(-2, 3))))
    tiles = tuple(TileSpec(L, L, float(rng.uniform(0.3, 1.0)), kx, ky) for kx, ky in sorted(keys))
    layout = IrsLayout(tiles, wave, lattice)
    modes = set()
    while len(modes) < n_modes:
        modes.add(TransmissionMode(*np.round(rng.uniform(-0.5, 0.5, size=3), 6)))
    codebook = Codebook(tuple(sorted(modes, key=lambda m: (m.beta_bar_x, m.beta_bar_y, m.beta_bar_0))))

    def array():
        n = int(rng.integers(1, 4))
        return ArrayGeometry(tuple(tuple(rng.uniform(-1, 1, size=3)) for _ in range(n)))

    txs = tuple(array() for _ in range(n_tx))
    rxs = tuple(array() for _ in range(n_rx))

    def sphere():
        return float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi))

    direct = {
        (j, i): tuple(DirectPath(*sphere(), *sphere(), 0.1 * random_gain(rng))
                      for _ in range(int(rng.integers(0, max_paths + 1))))
        for j in range(n_rx) for i in range(n_tx)
    }
    incident = {
        i: tuple(IncidentPath(*sphere(), random_triple(rng), random_gain(rng))
                 for _ in range(int(rng.integers(1, max_paths + 1))))
        for i in range(n_tx)
    }
    outgoing = {
        j: tuple(OutgoingPath(random_pair(rng), *sphere(), random_gain(rng))
                 for _ in range(int(rng.integers(1, max_paths + 1))))
        for j in range(n_rx)
    }
    return ChannelScenario(txs, rxs, layout, codebook, direct, incident, outgoing)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
