"""Angle sweeps over tile-response variants, peak location and beamwidth."""

from __future__ import annotations

import math
import re
from typing import Callable, Optional, Sequence

import numpy as np

from irs_tiles.geometry import AnglePair, AngleTriple, WaveSpec
from irs_tiles.response import (
    DiscreteLattice,
    TileSpec,
    TransmissionMode,
    continuous_tile_response,
    discrete_tile_response,
    response_db,
)

ResponseFn = Callable[[AngleTriple, AnglePair, TransmissionMode], complex]

_BITS_VARIANT = re.compile(r"^discrete-(\d+)bit$")


def variant_names_valid(names: Sequence[str]) -> None:
    for name in names:
        if name not in ("continuous", "discrete-ideal", "discrete-gap") and not _BITS_VARIANT.match(name):
            raise ValueError(
                f"unknown variant {name!r}; use continuous, discrete-ideal, discrete-<b>bit or discrete-gap"
            )


def response_model(variant: str, tile: TileSpec, wave: WaveSpec,
                   cell_spacing: Optional[tuple[float, float]] = None,
                   cell_edge: Optional[float] = None,
                   gap_cell_edge: Optional[float] = None) -> ResponseFn:
    """Callable ``(psi_t, psi_r, mode) -> g`` for one named model variant.

    ``discrete-ideal`` uses unquantized phases, ``discrete-<b>bit`` quantizes
    them to ``b`` bits and ``discrete-gap`` uses the smaller ``gap_cell_edge``.
    """
    variant_names_valid([variant])
    if variant == "continuous":
        return lambda psi_t, psi_r, mode: continuous_tile_response(psi_t, psi_r, mode, tile, wave)
    if cell_spacing is None:
        raise ValueError(f"variant {variant!r} needs a cell spacing")
    d_x, d_y = cell_spacing
    edge = cell_edge if cell_edge is not None else min(d_x, d_y)
    bits = None
    if variant == "discrete-gap":
        if gap_cell_edge is None:
            raise ValueError("variant 'discrete-gap' needs gap_cell_edge")
        edge = gap_cell_edge
    else:
        match = _BITS_VARIANT.match(variant)
        if match:
            bits = int(match.group(1))
    lattice = DiscreteLattice.for_tile(tile, d_x, d_y, edge, bits)
    return lambda psi_t, psi_r, mode: discrete_tile_response(psi_t, psi_r, mode, tile, lattice, wave)


def sweep_theta_r(model: ResponseFn, psi_t: AngleTriple, phi_r: float, mode: TransmissionMode,
                  thetas: Sequence[float]) -> np.ndarray:
    return np.array([model(psi_t, AnglePair(float(th), phi_r), mode) for th in thetas])


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform grid; the last point is dropped if it would overshoot ``stop``."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    if stop < start:
        raise ValueError(f"range must be ordered, got start={start!r} > stop={stop!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def to_db(values: Sequence[complex], wave: WaveSpec) -> np.ndarray:
    return np.array([response_db(v, wave) for v in values])


def peak_index(values_db: np.ndarray) -> int:
    return int(np.argmax(values_db))


def beamwidth(angles: np.ndarray, values_db: np.ndarray, drop_db: float = 10.0) -> float:
    """Width of the contiguous region around the peak within ``drop_db`` of the maximum.

    Returned in the units of ``angles``.
    """
    i = peak_index(values_db)
    keep = values_db >= values_db[i] - drop_db
    lo = i
    while lo > 0 and keep[lo - 1]:
        lo -= 1
    hi = i
    while hi < len(keep) - 1 and keep[hi + 1]:
        hi += 1
    return float(angles[hi] - angles[lo])
