"""End-to-end multi-transmitter / multi-receiver channel with IRS-guided paths.

For receiver ``j`` and transmitter ``i``

    H = A_d S_d D_d^H + A_r S_r G S_t D_t^H

where the columns of ``A``/``D`` are receive/transmit steering vectors, the
``S`` are diagonal path-gain matrices and ``G`` collects the translated tile
responses for the selected transmission modes. Indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from irs_tiles.codebook import Codebook, IrsLayout, tile_translated_response
from irs_tiles.geometry import AnglePair, AngleTriple, WaveSpec, spherical_unit_vector


class ConfigurationError(ValueError):
    """Scenario pieces are missing or inconsistent."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna element positions, in wavelengths."""

    element_positions: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        positions = tuple(tuple(float(c) for c in p) for p in self.element_positions)
        if not positions:
            raise ValueError("an array needs at least one element")
        for p in positions:
            if len(p) != 3 or not all(math.isfinite(c) for c in p):
                raise ValueError(f"element position must be 3 finite numbers, got {p!r}")
        object.__setattr__(self, "element_positions", positions)

    @classmethod
    def single(cls) -> "ArrayGeometry":
        return cls(((0.0, 0.0, 0.0),))

    @classmethod
    def uniform_linear(cls, n: int, spacing: float = 0.5, axis: int = 0) -> "ArrayGeometry":
        pos = []
        for l in range(n):
            p = [0.0, 0.0, 0.0]
            p[axis] = l * spacing
            pos.append(tuple(p))
        return cls(tuple(pos))

    def __len__(self) -> int:
        return len(self.element_positions)


@dataclass(frozen=True)
class DirectPath:
    """Transmitter-to-receiver path: departure and arrival angles at the arrays."""

    aod_theta: float
    aod_phi: float
    aoa_theta: float
    aoa_phi: float
    gain: complex


@dataclass(frozen=True)
class IncidentPath:
    """Transmitter-to-IRS path; ``irs`` is the arrival angle and polarization at the surface."""

    aod_theta: float
    aod_phi: float
    irs: AngleTriple
    gain: complex


@dataclass(frozen=True)
class OutgoingPath:
    """IRS-to-receiver path; ``irs`` is the departure angle at the surface."""

    irs: AnglePair
    aoa_theta: float
    aoa_phi: float
    gain: complex


@dataclass(frozen=True)
class ModeSelection:
    """One mode index per tile."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(m) for m in self.assignment))

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, n: int) -> int:
        return self.assignment[n]

    def one_hot(self, n_modes: int) -> np.ndarray:
        """The ``N x M`` binary matrix ``s[n, m]``."""
        s = np.zeros((len(self.assignment), n_modes), dtype=int)
        s[np.arange(len(self.assignment)), list(self.assignment)] = 1
        return s

    def validate(self, n_tiles: int, n_modes: int) -> None:
        if len(self.assignment) != n_tiles:
            raise ConfigurationError(f"selection has {len(self.assignment)} entries for {n_tiles} tiles")
        for n, m in enumerate(self.assignment):
            if not 0 <= m < n_modes:
                raise ConfigurationError(f"tile {n}: mode index {m} outside [0, {n_modes})")


@dataclass(frozen=True)
class ChannelScenario:
    """Arrays, IRS layout, codebook and path tables for every link.

    ``direct`` is keyed by ``(j, i)``, ``incident`` by transmitter ``i`` and
    ``outgoing`` by receiver ``j``.
    """

    transmitters: tuple[ArrayGeometry, ...]
    receivers: tuple[ArrayGeometry, ...]
    layout: IrsLayout
    codebook: Codebook
    direct: Mapping[tuple[int, int], tuple[DirectPath, ...]] = field(default_factory=dict)
    incident: Mapping[int, tuple[IncidentPath, ...]] = field(default_factory=dict)
    outgoing: Mapping[int, tuple[OutgoingPath, ...]] = field(default_factory=dict)
    noise_variance: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "transmitters", tuple(self.transmitters))
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(self, "direct", {tuple(k): tuple(v) for k, v in self.direct.items()})
        object.__setattr__(self, "incident", {int(k): tuple(v) for k, v in self.incident.items()})
        object.__setattr__(self, "outgoing", {int(k): tuple(v) for k, v in self.outgoing.items()})
        if not (self.noise_variance >= 0 and math.isfinite(self.noise_variance)):
            raise ConfigurationError(f"noise_variance must be >= 0, got {self.noise_variance!r}")
        n_tx, n_rx = len(self.transmitters), len(self.receivers)
        for j, i in self.direct:
            if not (0 <= j < n_rx and 0 <= i < n_tx):
                raise ConfigurationError(f"direct paths for unknown link (rx={j}, tx={i})")
        for i in self.incident:
            if not 0 <= i < n_tx:
                raise ConfigurationError(f"incident paths for unknown transmitter {i}")
        for j in self.outgoing:
            if not 0 <= j < n_rx:
                raise ConfigurationError(f"outgoing paths for unknown receiver {j}")
        for paths in (*self.direct.values(), *self.incident.values(), *self.outgoing.values()):
            for p in paths:
                if not np.isfinite(p.gain):
                    raise ConfigurationError(f"non-finite path gain in {p}")

    @property
    def n_tiles(self) -> int:
        return len(self.layout)

    @property
    def n_modes(self) -> int:
        return len(self.codebook)

    def direct_paths(self, j: int, i: int) -> tuple[DirectPath, ...]:
        try:
            return self.direct[(j, i)]
        except KeyError:
            raise ConfigurationError(f"no direct path set for link (rx={j}, tx={i})") from None

    def incident_paths(self, i: int) -> tuple[IncidentPath, ...]:
        try:
            return self.incident[i]
        except KeyError:
            raise ConfigurationError(f"no incident path set for transmitter {i}") from None

    def outgoing_paths(self, j: int) -> tuple[OutgoingPath, ...]:
        try:
            return self.outgoing[j]
        except KeyError:
            raise ConfigurationError(f"no outgoing path set for receiver {j}") from None


def steering_vector(array: ArrayGeometry, direction: Sequence[float],
                    wave: Optional[WaveSpec] = None) -> np.ndarray:
    """Per-element phases ``exp(j 2 pi direction . p_l)`` with ``p_l`` in wavelengths.

    ``wave`` is accepted for interface symmetry; positions are already
    normalized by the wavelength.
    """
    positions = np.asarray(array.element_positions, dtype=float)
    return np.exp(2j * np.pi * positions @ np.asarray(direction, dtype=float))


def steering_matrix(array: ArrayGeometry, angles: Sequence[tuple[float, float]]) -> np.ndarray:
    """Steering vectors for ``(theta, phi)`` pairs stacked as columns."""
    out = np.zeros((len(array), len(angles)), dtype=complex)
    for col, (theta, phi) in enumerate(angles):
        out[:, col] = steering_vector(array, spherical_unit_vector(theta, phi))
    return out


def tile_mode_matrix(n: int, m: int, incident: Sequence[IncidentPath],
                     outgoing: Sequence[OutgoingPath], scenario: ChannelScenario) -> np.ndarray:
    """``G_{n,m}``: translated responses of tile ``n`` in mode ``m`` for every path pair."""
    out = np.zeros((len(outgoing), len(incident)), dtype=complex)
    for r, o in enumerate(outgoing):
        for t, p in enumerate(incident):
            out[r, t] = tile_translated_response(n, m, p.irs, o.irs, scenario.layout, scenario.codebook)
    return out


def assemble_G(j: int, i: int, selection: ModeSelection, scenario: ChannelScenario) -> np.ndarray:
    """IRS response matrix (``L_r x L_t``) between transmitter ``i`` and receiver ``j``."""
    selection.validate(scenario.n_tiles, scenario.n_modes)
    incident = scenario.incident_paths(i)
    outgoing = scenario.outgoing_paths(j)
    G = np.zeros((len(outgoing), len(incident)), dtype=complex)
    for n, m in enumerate(selection.assignment):
        G += tile_mode_matrix(n, m, incident, outgoing, scenario)
    return G


def direct_matrix(j: int, i: int, scenario: ChannelScenario) -> np.ndarray:
    rx, tx = scenario.receivers[j], scenario.transmitters[i]
    paths = scenario.direct_paths(j, i)
    A = steering_matrix(rx, [(p.aoa_theta, p.aoa_phi) for p in paths])
    D = steering_matrix(tx, [(p.aod_theta, p.aod_phi) for p in paths])
    S = np.diag(np.array([p.gain for p in paths], dtype=complex))
    return A @ S @ D.conj().T


def irs_side_factors(j: int, i: int, scenario: ChannelScenario) -> tuple[np.ndarray, np.ndarray]:
    """``(A_r S_r, S_t D_t^H)`` so the IRS term is ``left @ G @ right``."""
    rx, tx = scenario.receivers[j], scenario.transmitters[i]
    incident = scenario.incident_paths(i)
    outgoing = scenario.outgoing_paths(j)
    A_r = steering_matrix(rx, [(o.aoa_theta, o.aoa_phi) for o in outgoing])
    D_t = steering_matrix(tx, [(p.aod_theta, p.aod_phi) for p in incident])
    left = A_r @ np.diag(np.array([o.gain for o in outgoing], dtype=complex))
    right = np.diag(np.array([p.gain for p in incident], dtype=complex)) @ D_t.conj().T
    return left, right


def end_to_end_matrix(j: int, i: int, selection: ModeSelection, scenario: ChannelScenario) -> np.ndarray:
    """Channel matrix ``H^{(j,i)}`` of shape ``J_j x T_i``."""
    H = direct_matrix(j, i, scenario)
    left, right = irs_side_factors(j, i, scenario)
    G = assemble_G(j, i, selection, scenario)
    return H + left @ G @ right


def receiver_noise(seed: int, j: int, draw: int, size: int, variance: float) -> np.ndarray:
    """Circularly-symmetric Gaussian noise from a stream keyed by ``(seed, j, draw)``."""
    if variance == 0.0:
        return np.zeros(size, dtype=complex)
    ss = np.random.SeedSequence(seed, spawn_key=(j, draw))
    rng = np.random.Generator(np.random.Philox(ss))
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return math.sqrt(variance / 2.0) * z


def apply_channel(selection: ModeSelection, scenario: ChannelScenario,
                  transmit_vectors: Sequence[np.ndarray], draw: int = 0) -> list[np.ndarray]:
    """Received vectors ``y_j = sum_i H^{(j,i)} x_i + z_j`` for every receiver.

    ``draw`` selects an independent noise realization for the same seed.
    """
    if len(transmit_vectors) != len(scenario.transmitters):
        raise ConfigurationError(
            f"got {len(transmit_vectors)} transmit vectors for {len(scenario.transmitters)} transmitters"
        )
    xs = [np.asarray(x, dtype=complex) for x in transmit_vectors]
    for i, (x, tx) in enumerate(zip(xs, scenario.transmitters)):
        if x.shape != (len(tx),):
            raise ConfigurationError(f"transmitter {i}: vector shape {x.shape}, expected ({len(tx)},)")
    received = []
    for j, rx in enumerate(scenario.receivers):
        y = np.zeros(len(rx), dtype=complex)
        for i, x in enumerate(xs):
            y += end_to_end_matrix(j, i, selection, scenario) @ x
        y += receiver_noise(scenario.rng_seed, j, draw, len(rx), scenario.noise_variance)
        received.append(y)
    return received


def free_space_amplitude(distance: float) -> float:
    """Amplitude ``1 / sqrt(4 pi distance**2)`` of an isotropic free-space path."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance!r}")
    return 1.0 / (math.sqrt(4.0 * math.pi) * distance)


def link_budget_ratio(rho_d: float, rho_t: float, rho_r: float, irs_area: float,
                      wave: WaveSpec) -> float:
    """IRS-assisted over direct free-space path gain: ``A^2 rho_d^2 / (lambda^2 rho_t^2 rho_r^2)``."""
    for name, value in (("rho_d", rho_d), ("rho_t", rho_t), ("rho_r", rho_r)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    if irs_area < 0:
        raise ValueError(f"irs_area must be non-negative, got {irs_area!r}")
    lam = wave.wavelength
    irs_gain = irs_area**2 / (4.0 * math.pi * lam**2 * rho_t**2 * rho_r**2)
    direct_gain = 1.0 / (4.0 * math.pi * rho_d**2)
    return irs_gain / direct_gain


def required_irs_area(rho_d: float, rho_t: float, rho_r: float, wave: WaveSpec) -> float:
    """Area at which the IRS-assisted and direct links have equal path loss."""
    for name, value in (("rho_d", rho_d), ("rho_t", rho_t), ("rho_r", rho_r)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    return wave.wavelength * rho_t * rho_r / rho_d


def matrix_to_csv_rows(H: np.ndarray) -> list[list[str]]:
    """Row-major rows of ``re, im`` pairs, one CSV row per matrix row."""
    rows = []
    for row in np.atleast_2d(H):
        cells = []
        for v in row:
            cells.extend((repr(float(v.real)), repr(float(v.imag))))
        rows.append(cells)
    return rows
