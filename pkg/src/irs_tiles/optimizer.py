"""Online mode selection: exhaustive search for small IRSs, greedy per-tile ascent otherwise.

Objectives are evaluated at zero noise. Ties are broken towards the
lexicographically smallest assignment so results are reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from irs_tiles.channel import (
    ChannelScenario,
    ConfigurationError,
    ModeSelection,
    direct_matrix,
    end_to_end_matrix,
    irs_side_factors,
    tile_mode_matrix,
)

OBJECTIVE_KINDS = ("sum-received-power", "min-link-power")
DEFAULT_BUDGET = 10**6


class SearchBudgetExceeded(RuntimeError):
    """The exhaustive search space ``M**N`` is larger than the allowed budget."""


@dataclass(frozen=True)
class Objective:
    """What to maximize.

    With ``isotropic=True`` each transmitter sends a white unit-power signal
    and the received power of link ``(j, i)`` is ``||H||_F**2 / T_i``;
    otherwise the fixed ``transmit_vectors`` are used.
    """

    kind: str = "sum-received-power"
    transmit_vectors: Optional[tuple[tuple[complex, ...], ...]] = None
    isotropic: bool = False

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"objective kind must be one of {OBJECTIVE_KINDS}, got {self.kind!r}")
        if self.transmit_vectors is not None:
            object.__setattr__(
                self, "transmit_vectors",
                tuple(tuple(complex(v) for v in x) for x in self.transmit_vectors),
            )
        if self.isotropic == (self.transmit_vectors is not None):
            raise ValueError("give exactly one of transmit_vectors or isotropic=True")

    def check(self, scenario: ChannelScenario) -> None:
        if self.transmit_vectors is None:
            return
        if len(self.transmit_vectors) != len(scenario.transmitters):
            raise ConfigurationError(
                f"{len(self.transmit_vectors)} transmit vectors for {len(scenario.transmitters)} transmitters"
            )
        for i, (x, tx) in enumerate(zip(self.transmit_vectors, scenario.transmitters)):
            if len(x) != len(tx):
                raise ConfigurationError(f"transmitter {i}: vector length {len(x)}, array has {len(tx)}")


@dataclass
class OptimizationResult:
    selection: ModeSelection
    objective_value: float
    evaluations: int
    trace: list[float] = field(default_factory=list)
    algorithm: str = ""

    def to_record(self) -> str:
        """Plain ``key=value`` text record."""
        lines = [
            f"algorithm={self.algorithm}",
            "selection=" + " ".join(str(m) for m in self.selection.assignment),
            f"objective={self.objective_value!r}",
            f"evaluations={self.evaluations}",
            "trace=" + " ".join(repr(v) for v in self.trace),
        ]
        return "\n".join(lines) + "\n"


def _reduce(powers: Sequence[float], kind: str) -> float:
    if not powers:
        return 0.0
    return float(sum(powers)) if kind == "sum-received-power" else float(min(powers))


def evaluate_objective(selection: ModeSelection, scenario: ChannelScenario, objective: Objective) -> float:
    """Objective value of ``selection``, computed from the full channel matrices."""
    objective.check(scenario)
    powers = []
    for j in range(len(scenario.receivers)):
        if objective.isotropic:
            p = 0.0
            for i, tx in enumerate(scenario.transmitters):
                H = end_to_end_matrix(j, i, selection, scenario)
                p += float(np.sum(np.abs(H) ** 2)) / len(tx)
        else:
            y = np.zeros(len(scenario.receivers[j]), dtype=complex)
            for i, x in enumerate(objective.transmit_vectors):
                y += end_to_end_matrix(j, i, selection, scenario) @ np.asarray(x)
            p = float(np.vdot(y, y).real)
        powers.append(p)
    return _reduce(powers, objective.kind)


class _CachedObjective:
    """Per-receiver vectors ``d_j + sum_n V_j[n, s_n]`` whose squared norms give the powers.

    Tile contributions are precomputed once so each evaluation is a sum of
    ``N`` stored vectors per receiver.
    """

    def __init__(self, scenario: ChannelScenario, objective: Objective):
        objective.check(scenario)
        self.kind = objective.kind
        self.evaluations = 0
        n_tiles, n_modes = scenario.n_tiles, scenario.n_modes
        self.base = []
        self.tiles = []
        for j in range(len(scenario.receivers)):
            base_parts, tile_parts = [], []
            for i, tx in enumerate(scenario.transmitters):
                Hd = direct_matrix(j, i, scenario)
                left, right = irs_side_factors(j, i, scenario)
                incident = scenario.incident_paths(i)
                outgoing = scenario.outgoing_paths(j)
                if objective.isotropic:
                    w = 1.0 / math.sqrt(len(tx))

                    def project(M):
                        return w * M.ravel()
                else:
                    x = np.asarray(objective.transmit_vectors[i], dtype=complex)

                    def project(M):
                        return M @ x
                base = project(Hd)
                base_parts.append(base)
                per_tile = np.zeros((n_tiles, n_modes, base.size), dtype=complex)
                for n in range(n_tiles):
                    for m in range(n_modes):
                        per_tile[n, m] = project(left @ tile_mode_matrix(n, m, incident, outgoing, scenario) @ right)
                tile_parts.append(per_tile)
            self.base.append(np.concatenate(base_parts))
            self.tiles.append(np.concatenate(tile_parts, axis=2))

    def __call__(self, assignment: Sequence[int]) -> float:
        self.evaluations += 1
        powers = []
        for base, tiles in zip(self.base, self.tiles):
            u = base.copy()
            for n, m in enumerate(assignment):
                u += tiles[n, m]
            powers.append(float(np.vdot(u, u).real))
        return _reduce(powers, self.kind)


def exhaustive_search(scenario: ChannelScenario, objective: Objective,
                      budget: int = DEFAULT_BUDGET) -> OptimizationResult:
    """Evaluate all ``M**N`` assignments and keep the best.

    Raises
    ------
    SearchBudgetExceeded
        If ``M**N`` exceeds ``budget``.
    """
    n_tiles, n_modes = scenario.n_tiles, scenario.n_modes
    size = n_modes**n_tiles
    if size > budget:
        raise SearchBudgetExceeded(
            f"exhaustive search over M**N = {n_modes}**{n_tiles} = {size} assignments exceeds budget {budget}"
        )
    f = _CachedObjective(scenario, objective)
    best, best_value = None, -math.inf
    trace = []
    for assignment in itertools.product(range(n_modes), repeat=n_tiles):
        value = f(assignment)
        if value > best_value:
            best, best_value = assignment, value
            trace.append(value)
    return OptimizationResult(ModeSelection(best), best_value, f.evaluations, trace, "exhaustive")


def _greedy_from(f: _CachedObjective, start: Sequence[int], n_modes: int,
                 passes: int) -> tuple[list[int], float, list[float]]:
    assignment = list(start)
    if not assignment:
        value = f(assignment)
        return assignment, value, [value]
    value = None
    trace = []
    for _ in range(passes):
        changed = False
        for n in range(len(assignment)):
            current = assignment[n]
            scores = []
            for m in range(n_modes):
                assignment[n] = m
                scores.append(f(assignment))
            if value is None:
                value = scores[current]
                trace.append(value)
            best_m = int(np.argmax(scores))
            if scores[best_m] > value:
                assignment[n] = best_m
                value = scores[best_m]
                changed = True
            else:
                assignment[n] = current
        trace.append(value)
        if not changed:
            break
    return assignment, value, trace


def greedy_search(scenario: ChannelScenario, objective: Objective, passes: int = 10,
                  initial: Optional[ModeSelection] = None, restarts: int = 0,
                  seed: Optional[int] = None) -> OptimizationResult:
    """Coordinate ascent over tiles.

    Each pass visits tiles in index order and moves a tile to the mode that
    maximizes the objective with all other tiles fixed, if that strictly
    improves it. Stops after a pass without changes or after ``passes``.
    ``restarts`` extra runs start from seeded random assignments; the best
    run wins (earliest on ties). ``trace`` holds the initial value followed
    by the value after each pass of the winning run.
    """
    if passes < 1:
        raise ValueError(f"passes must be >= 1, got {passes}")
    n_tiles, n_modes = scenario.n_tiles, scenario.n_modes
    if initial is None:
        initial = ModeSelection((0,) * n_tiles)
    initial.validate(n_tiles, n_modes)
    f = _CachedObjective(scenario, objective)
    starts = [list(initial.assignment)]
    if restarts:
        rng = np.random.default_rng(seed)
        starts += [list(rng.integers(0, n_modes, size=n_tiles)) for _ in range(restarts)]
    best = None
    for start in starts:
        run = _greedy_from(f, start, n_modes, passes)
        if best is None or run[1] > best[1]:
            best = run
    assignment, value, trace = best
    return OptimizationResult(ModeSelection(assignment), value, f.evaluations, trace, "greedy")
