"""Tile response functions: continuous closed form, discrete unit-cell sum, quadrature check.

The tile is centred at the origin of the x-y plane. A transmission mode
applies the separable linear phase profile

    beta(x, y) = 2 k bx x + 2 k by y + beta_0,   beta_0 = 2 pi b0,

so a mode ``(bx, by, b0)`` reflects most strongly where
``A_x(t) + A_x(r) = -2 bx`` and ``A_y(t) + A_y(r) = -2 by``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from irs_tiles.geometry import (
    TWO_PI,
    AnglePair,
    AngleTriple,
    WaveSpec,
    c_factor,
    transverse_components,
)

SQRT_4PI = math.sqrt(4.0 * math.pi)
_SINC_SERIES_CUTOFF = 1e-6


def sinc(x: float) -> float:
    """Unnormalized ``sin(x)/x`` with ``sinc(0) = 1``."""
    if abs(x) < _SINC_SERIES_CUTOFF:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


@dataclass(frozen=True)
class TileSpec:
    """Rectangular tile of size ``L_x`` by ``L_y`` centred at ``(K_x L_x, K_y L_y)``."""

    L_x: float
    L_y: float
    rho_eff: float = 1.0
    K_x: int = 0
    K_y: int = 0

    def __post_init__(self):
        if not (self.L_x > 0 and self.L_y > 0):
            raise ValueError(f"tile sides must be positive, got {self.L_x!r} x {self.L_y!r}")
        if not 0.0 < self.rho_eff <= 1.0:
            raise ValueError(f"rho_eff must lie in (0, 1], got {self.rho_eff!r}")

    @property
    def center(self) -> tuple[float, float]:
        return self.K_x * self.L_x, self.K_y * self.L_y


@dataclass(frozen=True)
class DiscreteLattice:
    """Unit-cell lattice of a discrete tile.

    ``phase_bits=None`` means unquantized phases.
    """

    Q_x: int
    Q_y: int
    d_x: float
    d_y: float
    L_e: float
    phase_bits: Optional[int] = None

    def __post_init__(self):
        if self.Q_x < 1 or self.Q_y < 1:
            raise ValueError(f"cell counts must be positive, got {self.Q_x} x {self.Q_y}")
        if not (self.d_x > 0 and self.d_y > 0):
            raise ValueError("cell spacings must be positive")
        if not 0.0 < self.L_e <= min(self.d_x, self.d_y) * (1 + 1e-12):
            raise ValueError(f"cell edge L_e={self.L_e!r} must lie in (0, min(d_x, d_y)]")
        if self.phase_bits is not None and self.phase_bits < 1:
            raise ValueError(f"phase_bits must be >= 1, got {self.phase_bits!r}")

    @classmethod
    def for_tile(cls, tile: TileSpec, d_x: float, d_y: float | None = None,
                 L_e: float | None = None, phase_bits: int | None = None) -> "DiscreteLattice":
        """Lattice filling ``tile`` with the given spacing (``L_e`` defaults to the spacing)."""
        d_y = d_x if d_y is None else d_y
        q_x = round(tile.L_x / d_x)
        q_y = round(tile.L_y / d_y)
        lattice = cls(q_x, q_y, d_x, d_y, min(d_x, d_y) if L_e is None else L_e, phase_bits)
        lattice.check_tile(tile)
        return lattice

    def indices(self, axis: str) -> np.ndarray:
        """Cell indices ``-Q/2+1 .. Q/2`` along ``axis`` (centred for odd ``Q``)."""
        q = self.Q_x if axis == "x" else self.Q_y
        lo = -((q - 1) // 2)
        return np.arange(lo, lo + q)

    def index_range(self, axis: str) -> tuple[int, int]:
        idx = self.indices(axis)
        return int(idx[0]), int(idx[-1])

    def check_tile(self, tile: TileSpec) -> None:
        for q, d, side, name in ((self.Q_x, self.d_x, tile.L_x, "x"), (self.Q_y, self.d_y, tile.L_y, "y")):
            if not math.isclose(q * d, side, rel_tol=1e-9):
                raise ValueError(f"lattice mismatch along {name}: Q*d = {q * d!r} but tile side is {side!r}")


@dataclass(frozen=True)
class TransmissionMode:
    """Normalized linear phase-gradient parameters, each in ``[-1, 1]``."""

    beta_bar_x: float
    beta_bar_y: float = 0.0
    beta_bar_0: float = 0.0

    def __post_init__(self):
        for name in ("beta_bar_x", "beta_bar_y", "beta_bar_0"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and -1.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [-1, 1], got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def target_x(self) -> float:
        """``A_x(t) + A_x(r)`` at the designed peak."""
        return -2.0 * self.beta_bar_x

    @property
    def target_y(self) -> float:
        return -2.0 * self.beta_bar_y

    @property
    def beta_0(self) -> float:
        """Constant phase offset in radians."""
        return TWO_PI * self.beta_bar_0


def direction_sums(psi_t: AngleTriple, psi_r: AnglePair) -> tuple[float, float]:
    """``(A_x(t) + A_x(r), A_y(t) + A_y(r))``."""
    tx, ty = transverse_components(psi_t.theta_t, psi_t.phi_t)
    rx, ry = transverse_components(psi_r.theta_r, psi_r.phi_r)
    return tx + rx, ty + ry


def g_tilde(psi_t: AngleTriple, psi_r: AnglePair) -> float:
    """Polarization and obliquity factor of the tile response, in ``[0, 1]``."""
    cp, sp = math.cos(psi_t.phi_pol), math.sin(psi_t.phi_pol)
    ct_r = math.cos(psi_r.theta_r)
    cf, sf = math.cos(psi_r.phi_r), math.sin(psi_r.phi_r)
    first = cp * ct_r * sf - sp * ct_r * cf
    second = sp * sf + cp * cf
    return c_factor(psi_t) * math.hypot(first, second)


def mode_from_directions(psi_t_star: AngleTriple, psi_r_star: AnglePair,
                         beta_0: float = 0.0) -> TransmissionMode:
    """Mode whose phase gradient steers ``psi_t_star`` into ``psi_r_star``."""
    sum_x, sum_y = direction_sums(psi_t_star, psi_r_star)
    return TransmissionMode(-0.5 * sum_x, -0.5 * sum_y, beta_0 / TWO_PI)


def peak_bound(tile: TileSpec, wave: WaveSpec) -> float:
    """Largest attainable ``|g|``: ``sqrt(4 pi) rho_eff L_x L_y / lambda``."""
    return SQRT_4PI * tile.rho_eff * tile.L_x * tile.L_y / wave.wavelength


def continuous_response_parts(psi_t: AngleTriple, psi_r: AnglePair, mode: TransmissionMode,
                              tile: TileSpec, wave: WaveSpec) -> tuple[float, float]:
    """Signed amplitude and phase ``(g_par, g_angle)`` with ``g = g_par * exp(1j * g_angle)``."""
    k = wave.k
    sum_x, sum_y = direction_sums(psi_t, psi_r)
    amp = (
        peak_bound(tile, wave)
        * g_tilde(psi_t, psi_r)
        * sinc(0.5 * k * tile.L_x * (sum_x - mode.target_x))
        * sinc(0.5 * k * tile.L_y * (sum_y - mode.target_y))
    )
    return amp, 0.5 * math.pi + mode.beta_0


def continuous_tile_response(psi_t: AngleTriple, psi_r: AnglePair, mode: TransmissionMode,
                             tile: TileSpec, wave: WaveSpec) -> complex:
    """Complex response of a continuous tile centred at the origin.

    The lattice and the tile position are ignored; see
    :func:`irs_tiles.codebook.tile_translated_response` for placed tiles.
    """
    amp, phase = continuous_response_parts(psi_t, psi_r, mode, tile, wave)
    return amp * complex(math.cos(phase), math.sin(phase))


def quantize_phase(beta, bits: int):
    """Round phases to the nearest of ``2 pi m / 2**bits``; ties go to the lower level.

    Accepts scalars or arrays; results lie in ``[0, 2 pi)``.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits!r}")
    levels = 2**bits
    step = TWO_PI / levels
    wrapped = np.mod(beta, TWO_PI)
    base = np.floor(wrapped / step)
    frac = wrapped - base * step
    idx = np.mod(base + (frac > 0.5 * step), levels)
    out = idx * step
    return float(out) if np.ndim(out) == 0 else out


def cell_phases(mode: TransmissionMode, lattice: DiscreteLattice, wave: WaveSpec,
                axis: str) -> np.ndarray:
    """Per-axis cell phases ``beta_n`` (half the constant offset on each axis)."""
    if axis == "x":
        slope, d = mode.beta_bar_x, lattice.d_x
    else:
        slope, d = mode.beta_bar_y, lattice.d_y
    phases = 2.0 * wave.k * slope * lattice.indices(axis) * d + math.pi * mode.beta_bar_0
    if lattice.phase_bits is not None:
        phases = quantize_phase(phases, lattice.phase_bits)
    return np.asarray(phases, dtype=float)


def unit_cell_amplitude(lattice: DiscreteLattice, rho_eff: float, wave: WaveSpec) -> float:
    return SQRT_4PI * rho_eff * lattice.L_e**2 / wave.wavelength


def unit_cell_response(n_x: int, n_y: int, cell_phase_x: float, cell_phase_y: float,
                       psi_t: AngleTriple, psi_r: AnglePair, lattice: DiscreteLattice,
                       rho_eff: float, wave: WaveSpec) -> complex:
    """Response of the ``(n_x, n_y)`` unit cell carrying phases ``cell_phase_x + cell_phase_y``."""
    for n, axis in ((n_x, "x"), (n_y, "y")):
        lo, hi = lattice.index_range(axis)
        if not lo <= n <= hi:
            raise IndexError(f"cell index {n} outside [{lo}, {hi}] along {axis}")
    k = wave.k
    sum_x, sum_y = direction_sums(psi_t, psi_r)
    exponent = (k * lattice.d_x * sum_x * n_x + cell_phase_x
                + k * lattice.d_y * sum_y * n_y + cell_phase_y)
    amp = unit_cell_amplitude(lattice, rho_eff, wave) * g_tilde(psi_t, psi_r)
    return 1j * amp * complex(math.cos(exponent), math.sin(exponent))


def discrete_tile_response(psi_t: AngleTriple, psi_r: AnglePair, mode: TransmissionMode,
                           tile: TileSpec, lattice: DiscreteLattice, wave: WaveSpec) -> complex:
    """Superposition of all unit-cell responses of a discrete tile centred at the origin.

    The double sum factorizes into an x-sum times a y-sum because the
    cell phases are separable.
    """
    lattice.check_tile(tile)
    k = wave.k
    sum_x, sum_y = direction_sums(psi_t, psi_r)
    n_x = lattice.indices("x")
    n_y = lattice.indices("y")
    if lattice.phase_bits is None:
        # the constant offset factors out exactly when phases are not quantized
        offset = complex(math.cos(mode.beta_0), math.sin(mode.beta_0))
        mode = TransmissionMode(mode.beta_bar_x, mode.beta_bar_y, 0.0)
    else:
        offset = 1.0
    row = np.exp(1j * (k * lattice.d_x * sum_x * n_x + cell_phases(mode, lattice, wave, "x"))).sum()
    col = np.exp(1j * (k * lattice.d_y * sum_y * n_y + cell_phases(mode, lattice, wave, "y"))).sum()
    amp = unit_cell_amplitude(lattice, tile.rho_eff, wave) * g_tilde(psi_t, psi_r)
    return complex(1j * amp * row * col) * offset


def _midpoint_aperture_sum(coef_x: float, coef_y: float, L_x: float, L_y: float, n: int) -> complex:
    h_x, h_y = L_x / n, L_y / n
    x = -0.5 * L_x + (np.arange(n) + 0.5) * h_x
    y = -0.5 * L_y + (np.arange(n) + 0.5) * h_y
    phase = coef_x * x[:, None] + coef_y * y[None, :]
    return complex(np.exp(1j * phase).sum() * h_x * h_y)


def quadrature_oracle(psi_t: AngleTriple, psi_r: AnglePair, mode: TransmissionMode,
                      tile: TileSpec, wave: WaveSpec, grid_n: int = 512,
                      richardson: bool = True) -> complex:
    """Numerically integrate the aperture phase over the tile.

    Midpoint rule on a ``grid_n`` x ``grid_n`` mesh of the integrand
    ``exp(j k [A_x x + A_y y] + j beta(x, y))``. With ``richardson`` the
    result is extrapolated from ``grid_n`` and ``2 * grid_n`` meshes, which
    cancels the leading ``h**2`` error term.
    """
    if grid_n < 64:
        raise ValueError(f"grid_n must be >= 64, got {grid_n}")
    k = wave.k
    sum_x, sum_y = direction_sums(psi_t, psi_r)
    coef_x = k * sum_x + 2.0 * k * mode.beta_bar_x
    coef_y = k * sum_y + 2.0 * k * mode.beta_bar_y
    integral = _midpoint_aperture_sum(coef_x, coef_y, tile.L_x, tile.L_y, grid_n)
    if richardson:
        fine = _midpoint_aperture_sum(coef_x, coef_y, tile.L_x, tile.L_y, 2 * grid_n)
        integral = (4.0 * fine - integral) / 3.0
    integral *= complex(math.cos(mode.beta_0), math.sin(mode.beta_0))
    scale = SQRT_4PI * tile.rho_eff * g_tilde(psi_t, psi_r) / wave.wavelength
    return 1j * scale * integral


def response_db(g: complex, wave: WaveSpec, floor_db: float = -300.0) -> float:
    """``20 log10(|g| / lambda)``, floored so the result stays finite."""
    mag = abs(g) / wave.wavelength
    if mag <= 0.0:
        return floor_db
    return max(20.0 * math.log10(mag), floor_db)
