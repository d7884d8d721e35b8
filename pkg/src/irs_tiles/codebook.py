"""Transmission-mode codebooks, IRS tile layouts and per-tile translated responses."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from irs_tiles.geometry import TWO_PI, AnglePair, AngleTriple, WaveSpec, transverse_components
from irs_tiles.response import (
    DiscreteLattice,
    TileSpec,
    TransmissionMode,
    continuous_tile_response,
    direction_sums,
    discrete_tile_response,
)

CODEBOOK_HEADER = ("mode_index", "beta_bar_x", "beta_bar_y", "beta_bar_0")


@dataclass(frozen=True)
class Codebook:
    """Ordered, duplicate-free sequence of transmission modes shared by all tiles."""

    modes: tuple[TransmissionMode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a codebook needs at least one mode")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("codebook modes must be distinct")

    def __len__(self) -> int:
        return len(self.modes)

    def __getitem__(self, m: int) -> TransmissionMode:
        return self.modes[m]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CODEBOOK_HEADER)
        for m, mode in enumerate(self.modes):
            writer.writerow([m, repr(mode.beta_bar_x), repr(mode.beta_bar_y), repr(mode.beta_bar_0)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Codebook":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if not rows or tuple(rows[0]) != CODEBOOK_HEADER:
            raise ValueError(f"codebook CSV must start with header {','.join(CODEBOOK_HEADER)}")
        modes = []
        for expected, row in enumerate(rows[1:]):
            if int(row[0]) != expected:
                raise ValueError(f"mode_index {row[0]} out of order, expected {expected}")
            modes.append(TransmissionMode(float(row[1]), float(row[2]), float(row[3])))
        return cls(tuple(modes))


def build_grid_codebook(range_x: Sequence[float], steps_x: int,
                        range_y: Sequence[float] = (0.0, 0.0), steps_y: int = 1,
                        beta0_levels: Sequence[float] = (0.0,)) -> Codebook:
    """Cartesian grid of modes, iterated x-major, then y, then the constant phase.

    ``steps == 1`` places the single value at the lower end of the range.
    """
    axes = []
    for name, rng, steps in (("x", range_x, steps_x), ("y", range_y, steps_y)):
        lo, hi = rng
        if steps < 1:
            raise ValueError(f"steps_{name} must be >= 1, got {steps}")
        if not (-1.0 <= lo <= hi <= 1.0):
            raise ValueError(f"range_{name}={tuple(rng)} must be ordered and inside [-1, 1]")
        axes.append(np.linspace(lo, hi, steps) if steps > 1 else np.array([lo]))
    if not beta0_levels:
        raise ValueError("beta0_levels must not be empty")
    modes = tuple(
        TransmissionMode(float(bx), float(by), float(b0))
        for bx in axes[0]
        for by in axes[1]
        for b0 in beta0_levels
    )
    return Codebook(modes)


@dataclass(frozen=True)
class IrsLayout:
    """Tiles of a common size placed on the integer grid ``(K_x L_x, K_y L_y)``."""

    tiles: tuple[TileSpec, ...]
    wave: WaveSpec
    lattice: Optional[DiscreteLattice] = None

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))
        if self.tiles:
            first = self.tiles[0]
            for t in self.tiles[1:]:
                if not (math.isclose(t.L_x, first.L_x) and math.isclose(t.L_y, first.L_y)):
                    raise ValueError("all tiles must share the same L_x, L_y")
            keys = [(t.K_x, t.K_y) for t in self.tiles]
            if len(set(keys)) != len(keys):
                raise ValueError("tile grid positions (K_x, K_y) must be distinct")
            if self.lattice is not None:
                self.lattice.check_tile(first)

    @classmethod
    def full_grid(cls, n_x: int, n_y: int, L_x: float, L_y: float, wave: WaveSpec,
                  rho_eff: float = 1.0, lattice: Optional[DiscreteLattice] = None) -> "IrsLayout":
        """Partition an ``n_x L_x`` by ``n_y L_y`` surface into ``n_x * n_y`` tiles."""
        off_x, off_y = (n_x - 1) // 2, (n_y - 1) // 2
        tiles = tuple(
            TileSpec(L_x, L_y, rho_eff, i - off_x, j - off_y)
            for i in range(n_x)
            for j in range(n_y)
        )
        return cls(tiles, wave, lattice)

    def __len__(self) -> int:
        return len(self.tiles)

    def reference_response(self, n: int, mode: TransmissionMode,
                           psi_t: AngleTriple, psi_r: AnglePair) -> complex:
        """Response of tile ``n``'s mode as if the tile sat at the origin."""
        tile = self.tiles[n]
        if self.lattice is None:
            return continuous_tile_response(psi_t, psi_r, mode, tile, self.wave)
        return discrete_tile_response(psi_t, psi_r, mode, tile, self.lattice, self.wave)


def translation_phase(tile: TileSpec, psi_t: AngleTriple, psi_r: AnglePair, wave: WaveSpec) -> float:
    """Phase ``k [K_x L_x A_x(t, r) + K_y L_y A_y(t, r)]`` picked up by moving a tile off the origin."""
    sum_x, sum_y = direction_sums(psi_t, psi_r)
    c_x, c_y = tile.center
    return wave.k * (c_x * sum_x + c_y * sum_y)


def tile_translated_response(tile_index: int, mode_index: int, psi_t: AngleTriple,
                             psi_r: AnglePair, layout: IrsLayout, codebook: Codebook) -> complex:
    """Response of tile ``tile_index`` in mode ``mode_index`` at its actual position."""
    if not 0 <= tile_index < len(layout):
        raise IndexError(f"tile index {tile_index} outside [0, {len(layout)})")
    if not 0 <= mode_index < len(codebook):
        raise IndexError(f"mode index {mode_index} outside [0, {len(codebook)})")
    g_ref = layout.reference_response(tile_index, codebook[mode_index], psi_t, psi_r)
    phase = translation_phase(layout.tiles[tile_index], psi_t, psi_r, layout.wave)
    return complex(math.cos(phase), math.sin(phase)) * g_ref


def mode_peak_direction(mode: TransmissionMode, psi_t: AngleTriple) -> Optional[AnglePair]:
    """Reflection direction where ``mode`` peaks for incidence ``psi_t``.

    Returns ``None`` when the required transverse wave vector is longer than
    one (the target is evanescent).
    """
    t_x, t_y = transverse_components(psi_t.theta_t, psi_t.phi_t)
    v_x = mode.target_x - t_x
    v_y = mode.target_y - t_y
    norm = math.hypot(v_x, v_y)
    if norm > 1.0 + 1e-12:
        return None
    theta = math.asin(min(norm, 1.0))
    if norm == 0.0:
        return AnglePair(theta, 0.0)
    phi = math.atan2(v_y, v_x) % TWO_PI
    if phi >= TWO_PI:
        phi = 0.0
    return AnglePair(theta, phi)
