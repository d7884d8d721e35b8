"""Angle conventions, propagation directions and the incident polarization basis.

All angles are in radians. Directions follow the spherical convention

    a = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))

for both the incident direction (pointing from the surface towards the
source) and the reflection direction (pointing towards the observer), so a
specular reflection satisfies ``a_x(t) + a_x(r) = 0`` and ``a_y(t) + a_y(r) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


class DegenerateGeometryError(ValueError):
    """Raised when the polarization basis is undefined for an incident wave."""


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


def _check_azimuth(name: str, value: float) -> None:
    if not 0.0 <= value < TWO_PI:
        raise ValueError(f"{name} must lie in [0, 2*pi), got {value!r}")


@dataclass(frozen=True)
class AngleTriple:
    """Incident direction and polarization of a plane wave.

    ``theta_t`` excludes grazing incidence (``pi/2``).
    """

    theta_t: float
    phi_t: float
    phi_pol: float = 0.0

    def __post_init__(self):
        _check_finite(theta_t=self.theta_t, phi_t=self.phi_t, phi_pol=self.phi_pol)
        if not 0.0 <= self.theta_t < HALF_PI:
            raise ValueError(f"theta_t must lie in [0, pi/2), got {self.theta_t!r}")
        _check_azimuth("phi_t", self.phi_t)
        _check_azimuth("phi_pol", self.phi_pol)

    @property
    def direction(self) -> np.ndarray:
        return propagation_direction(self.theta_t, self.phi_t)


@dataclass(frozen=True)
class AnglePair:
    """Reflection (observation) direction."""

    theta_r: float
    phi_r: float

    def __post_init__(self):
        _check_finite(theta_r=self.theta_r, phi_r=self.phi_r)
        if not 0.0 <= self.theta_r <= HALF_PI:
            raise ValueError(f"theta_r must lie in [0, pi/2], got {self.theta_r!r}")
        _check_azimuth("phi_r", self.phi_r)

    @property
    def direction(self) -> np.ndarray:
        return propagation_direction(self.theta_r, self.phi_r)


@dataclass(frozen=True)
class WaveSpec:
    wavelength: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def k(self) -> float:
        """Wavenumber ``2*pi / wavelength``."""
        return TWO_PI / self.wavelength


def spherical_unit_vector(theta: float, phi: float) -> np.ndarray:
    """Unit vector for arbitrary spherical angles, no range checks."""
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def propagation_direction(theta: float, phi: float) -> np.ndarray:
    """Direction vector ``(A_x, A_y, A_z)`` of a wave leaving or reaching the surface.

    Parameters
    ----------
    theta : float
        Elevation from the surface normal, in ``[0, pi/2]``.
    phi : float
        Azimuth, in ``[0, 2*pi)``.
    """
    _check_finite(theta=theta, phi=phi)
    if not 0.0 <= theta <= HALF_PI:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    _check_azimuth("phi", phi)
    return spherical_unit_vector(theta, phi)


def transverse_components(theta: float, phi: float) -> tuple[float, float]:
    """``(A_x, A_y)`` without building the full vector."""
    st = math.sin(theta)
    return st * math.cos(phi), st * math.sin(phi)


def c_factor(psi_t: AngleTriple) -> float:
    """Projection factor ``A_z / sqrt(A_xy**2 + A_z**2)`` of the incident wave.

    ``A_xy`` is the component of the incident direction along the in-plane
    polarization axis ``(cos(phi_pol), sin(phi_pol))``. The result lies in
    ``[cos(theta_t), 1]``.
    """
    a_x, a_y = transverse_components(psi_t.theta_t, psi_t.phi_t)
    a_z = math.cos(psi_t.theta_t)
    a_xy = math.cos(psi_t.phi_pol) * a_x + math.sin(psi_t.phi_pol) * a_y
    denom = math.hypot(a_xy, a_z)
    if denom < 1e-12:
        raise DegenerateGeometryError(f"polarization basis undefined for {psi_t}")
    return a_z / denom


def polarization_basis(psi_t: AngleTriple, sign_b: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Electric and magnetic field directions ``(a_E, a_H)`` of the incident wave.

    ``sign_b`` flips the global field orientation; the simulation does not
    carry the physical field components that would fix it.
    """
    if sign_b not in (1, -1):
        raise ValueError(f"sign_b must be +1 or -1, got {sign_b!r}")
    c = c_factor(psi_t)
    a_t = psi_t.direction
    a_xy = math.cos(psi_t.phi_pol) * a_t[0] + math.sin(psi_t.phi_pol) * a_t[1]
    # z magnitude is sqrt(1 - c**2); its sign must oppose a_xy for a_H . a_t = 0
    a_hz = -a_xy / math.hypot(a_xy, a_t[2])
    a_h = sign_b * np.array([c * math.cos(psi_t.phi_pol), c * math.sin(psi_t.phi_pol), a_hz])
    a_e = np.cross(a_h, a_t)
    return a_e, a_h
