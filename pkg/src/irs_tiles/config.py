"""Sectioned key-value experiment files.

The format is INI-like (read with :mod:`configparser`). Angles are written in
degrees unless the file is loaded with ``angle_unit="rad"``; they are
converted to radians once, here. Lists use ``,`` between numbers and ``;``
or new (indented) lines between records. Recognized sections and keys::

    [wave]          wavelength, seed
    [irs]           tile_size = Lx, Ly ; rho_eff ; model = continuous|discrete
                    cell_spacing = dx, dy ; cell_edge ; phase_bits ; gap_cell_edge
    [tiles]         positions = Kx, Ky; ... ; selection = m0, m1, ...
    [codebook]      modes = bx, by, b0; ...      (explicit list), or
                    beta_x = lo, hi, steps ; beta_y = lo, hi, steps ; beta0_levels = ...
    [transmitters]  <i> = x, y, z; ...           (element positions in wavelengths)
    [receivers]     <j> = x, y, z; ... ; noise_variance
    [paths]         direct.<j>.<i> = aod_theta, aod_phi, aoa_theta, aoa_phi, gain_re, gain_im
                    incident.<i>   = aod_theta, aod_phi, theta_t, phi_t, phi_pol, gain_re, gain_im
                    outgoing.<j>   = theta_r, phi_r, aoa_theta, aoa_phi, gain_re, gain_im
    [objective]     kind ; transmit.<i> = c0, c1, ... | isotropic = true
                    algorithm = exhaustive|greedy|both ; budget ; passes ; restarts
    [sweep]         variable = theta_r|theta_t|beta_x ; range = start, stop, step
                    incident = theta_t, phi_t, phi_pol ; observation = theta_r, phi_r
                    mode = bx, by, b0  |  target = theta_t*, phi_t*, theta_r*, phi_r* (+ beta0)
                    variants = continuous, discrete-ideal, discrete-<b>bit, discrete-gap

Indices are 0-based. Links without a ``direct`` entry have no direct path;
transmitters/receivers without ``incident``/``outgoing`` entries have no
IRS-guided path.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Optional

from irs_tiles.channel import (
    ArrayGeometry,
    ChannelScenario,
    DirectPath,
    IncidentPath,
    ModeSelection,
    OutgoingPath,
)
from irs_tiles.codebook import Codebook, IrsLayout, build_grid_codebook
from irs_tiles.geometry import AnglePair, AngleTriple, WaveSpec
from irs_tiles.optimizer import DEFAULT_BUDGET, Objective
from irs_tiles.response import DiscreteLattice, TileSpec, TransmissionMode, mode_from_directions
from irs_tiles.sweeps import variant_names_valid

SECTIONS = ("wave", "irs", "tiles", "codebook", "transmitters", "receivers", "paths", "objective", "sweep")
ALGORITHMS = ("exhaustive", "greedy", "both")
SWEEP_VARIABLES = ("theta_r", "theta_t", "beta_x")


class ConfigError(ValueError):
    """Parse or validation failure, with file/line/field context in the message."""


@dataclass
class SweepSpec:
    variable: str = "theta_r"
    start: float = 0.0
    stop: float = math.pi / 2
    step: float = math.radians(0.05)
    theta_t: float = 0.0
    phi_t: float = 0.0
    phi_pol: float = 0.0
    theta_r: float = 0.0
    phi_r: float = 0.0
    mode: TransmissionMode = field(default_factory=lambda: TransmissionMode(0.0, 0.0, 0.0))
    variants: tuple[str, ...] = ("continuous",)


@dataclass
class ObjectiveSpec:
    kind: str = "sum-received-power"
    transmit: Optional[dict[int, tuple[complex, ...]]] = None
    isotropic: bool = False
    algorithm: str = "both"
    budget: int = DEFAULT_BUDGET
    passes: int = 10
    restarts: int = 0


@dataclass
class Experiment:
    wave: WaveSpec = field(default_factory=WaveSpec)
    seed: int = 0
    tile: Optional[TileSpec] = None
    model: str = "continuous"
    cell_spacing: Optional[tuple[float, float]] = None
    cell_edge: Optional[float] = None
    phase_bits: Optional[int] = None
    gap_cell_edge: Optional[float] = None
    positions: tuple[tuple[int, int], ...] = ()
    selection: Optional[tuple[int, ...]] = None
    codebook: Optional[Codebook] = None
    transmitters: dict[int, ArrayGeometry] = field(default_factory=dict)
    receivers: dict[int, ArrayGeometry] = field(default_factory=dict)
    noise_variance: float = 0.0
    direct: dict[tuple[int, int], tuple[DirectPath, ...]] = field(default_factory=dict)
    incident: dict[int, tuple[IncidentPath, ...]] = field(default_factory=dict)
    outgoing: dict[int, tuple[OutgoingPath, ...]] = field(default_factory=dict)
    objective: Optional[ObjectiveSpec] = None
    sweep: Optional[SweepSpec] = None

    def lattice(self) -> Optional[DiscreteLattice]:
        if self.model != "discrete":
            return None
        d_x, d_y = self.cell_spacing
        return DiscreteLattice.for_tile(self.tile, d_x, d_y, self.cell_edge, self.phase_bits)

    def layout(self) -> IrsLayout:
        if self.tile is None:
            raise ConfigError("[irs] tile_size is required")
        tiles = tuple(
            TileSpec(self.tile.L_x, self.tile.L_y, self.tile.rho_eff, kx, ky) for kx, ky in self.positions
        )
        return IrsLayout(tiles, self.wave, self.lattice())

    def scenario(self) -> ChannelScenario:
        if self.codebook is None:
            raise ConfigError("[codebook] section is required for a channel scenario")
        try:
            return ChannelScenario(
                transmitters=tuple(self.transmitters[i] for i in range(len(self.transmitters))),
                receivers=tuple(self.receivers[j] for j in range(len(self.receivers))),
                layout=self.layout(),
                codebook=self.codebook,
                direct={
                    (j, i): self.direct.get((j, i), ())
                    for j in range(len(self.receivers))
                    for i in range(len(self.transmitters))
                },
                incident={i: self.incident.get(i, ()) for i in range(len(self.transmitters))},
                outgoing={j: self.outgoing.get(j, ()) for j in range(len(self.receivers))},
                noise_variance=self.noise_variance,
                rng_seed=self.seed,
            )
        except KeyError as exc:
            raise ConfigError(f"array indices must be contiguous from 0; missing {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def mode_selection(self) -> ModeSelection:
        if self.selection is None:
            return ModeSelection((0,) * len(self.positions))
        return ModeSelection(self.selection)

    def objective_obj(self) -> Objective:
        spec = self.objective or ObjectiveSpec(isotropic=True)
        if spec.isotropic:
            return Objective(spec.kind, None, True)
        n_tx = len(self.transmitters)
        if spec.transmit is None or sorted(spec.transmit) != list(range(n_tx)):
            raise ConfigError("[objective] needs transmit.<i> for every transmitter or isotropic = true")
        return Objective(spec.kind, tuple(spec.transmit[i] for i in range(n_tx)), False)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map ``(section, key)`` to its 1-based line number."""
    index = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        if section and line and not line[0].isspace() and line[0] not in "#;":
            km = re.match(r"^([^=:]+?)\s*[=:]", line)
            if km:
                index[(section, km.group(1).strip().lower())] = lineno
    return index


class _Reader:
    def __init__(self, text: str, source: str, angle_unit: str):
        if angle_unit not in ("deg", "rad"):
            raise ValueError(f"angle_unit must be 'deg' or 'rad', got {angle_unit!r}")
        self.source = source
        self.to_rad = math.radians if angle_unit == "deg" else float
        self.lines = _line_index(text)
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        for section in self.cp.sections():
            if section not in SECTIONS:
                raise ConfigError(f"{source}: unknown section [{section}]; expected one of {', '.join(SECTIONS)}")

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        line = self.lines.get((section, key))
        where = f"{self.source}:{line}" if line else self.source
        return ConfigError(f"{where}: [{section}] {key}: {msg}")

    def has(self, section: str, key: str) -> bool:
        return self.cp.has_option(section, key)

    def raw(self, section: str, key: str) -> str:
        return self.cp.get(section, key)

    def convert(self, section: str, key: str, fn):
        try:
            return fn(self.raw(section, key))
        except ConfigError:
            raise
        except (ValueError, TypeError, IndexError, KeyError) as exc:
            raise self.error(section, key, str(exc)) from None

    def number(self, section: str, key: str, default=None, cast=float):
        if not self.has(section, key):
            if default is None:
                raise self.error(section, key, "missing required key")
            return default
        return self.convert(section, key, lambda s: cast(s.strip()))

    def numbers(self, section: str, key: str, count: Optional[int] = None, cast=float) -> tuple:
        def parse(s):
            values = tuple(cast(v.strip()) for v in s.replace("\n", " ").split(",") if v.strip())
            if count is not None and len(values) != count:
                raise ValueError(f"expected {count} comma-separated values, got {len(values)}")
            return values
        return self.convert(section, key, parse)

    def records(self, section: str, key: str, width: int, cast=float) -> list[tuple]:
        def parse(s):
            out = []
            for rec in re.split(r"[;\n]", s):
                if not rec.strip():
                    continue
                values = tuple(cast(v.strip()) for v in rec.split(","))
                if len(values) != width:
                    raise ValueError(f"record {rec.strip()!r} needs {width} values, got {len(values)}")
                out.append(values)
            return out
        return self.convert(section, key, parse)

    def boolean(self, section: str, key: str, default: bool) -> bool:
        if not self.has(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError as exc:
            raise self.error(section, key, str(exc)) from None

    def build(self, section: str, key: str, fn):
        """Run a constructor, reporting validation failures against ``key``."""
        try:
            return fn()
        except ConfigError:
            raise
        except (ValueError, TypeError, IndexError) as exc:
            raise self.error(section, key, str(exc)) from None


def _index_key(key: str, section: str, r: _Reader) -> int:
    if not key.isdigit():
        raise r.error(section, key, "expected a 0-based integer index")
    return int(key)


def loads(text: str, source: str = "<config>", angle_unit: str = "deg") -> Experiment:
    """Parse experiment text into an :class:`Experiment`."""
    r = _Reader(text, source, angle_unit)
    rad = r.to_rad
    exp = Experiment()

    if r.cp.has_section("wave"):
        wl = r.number("wave", "wavelength", 1.0)
        exp.wave = r.build("wave", "wavelength", lambda: WaveSpec(wl))
        exp.seed = r.number("wave", "seed", 0, cast=int)

    if r.cp.has_section("irs"):
        s = "irs"
        size = r.numbers(s, "tile_size", 2) if r.has(s, "tile_size") else None
        if size is None:
            raise r.error(s, "tile_size", "missing required key")
        rho = r.number(s, "rho_eff", 1.0)
        exp.tile = r.build(s, "tile_size", lambda: TileSpec(size[0], size[1], rho))
        exp.model = r.raw(s, "model").strip() if r.has(s, "model") else "continuous"
        if exp.model not in ("continuous", "discrete"):
            raise r.error(s, "model", f"expected continuous or discrete, got {exp.model!r}")
        if r.has(s, "cell_spacing"):
            exp.cell_spacing = r.numbers(s, "cell_spacing", 2)
        if r.has(s, "cell_edge"):
            exp.cell_edge = r.number(s, "cell_edge")
        if r.has(s, "phase_bits"):
            exp.phase_bits = r.number(s, "phase_bits", cast=int)
        if r.has(s, "gap_cell_edge"):
            exp.gap_cell_edge = r.number(s, "gap_cell_edge")
        if exp.model == "discrete":
            if exp.cell_spacing is None:
                raise r.error(s, "cell_spacing", "required when model = discrete")
            r.build(s, "cell_spacing", exp.lattice)

    if r.cp.has_section("tiles"):
        s = "tiles"
        if r.has(s, "positions"):
            exp.positions = tuple(tuple(p) for p in r.records(s, "positions", 2, cast=int))
        if r.has(s, "selection"):
            exp.selection = r.numbers(s, "selection", len(exp.positions), cast=int)

    if r.cp.has_section("codebook"):
        s = "codebook"
        if r.has(s, "modes"):
            recs = r.records(s, "modes", 3)
            exp.codebook = r.build(s, "modes", lambda: Codebook(tuple(TransmissionMode(*m) for m in recs)))
        else:
            bx = r.numbers(s, "beta_x", 3) if r.has(s, "beta_x") else (0.0, 0.0, 1)
            by = r.numbers(s, "beta_y", 3) if r.has(s, "beta_y") else (0.0, 0.0, 1)
            levels = r.numbers(s, "beta0_levels") if r.has(s, "beta0_levels") else (0.0,)
            exp.codebook = r.build(s, "beta_x", lambda: build_grid_codebook(
                bx[:2], int(bx[2]), by[:2], int(by[2]), levels))

    for section, target in (("transmitters", exp.transmitters), ("receivers", exp.receivers)):
        if not r.cp.has_section(section):
            continue
        for key in r.cp.options(section):
            if section == "receivers" and key == "noise_variance":
                exp.noise_variance = r.number(section, key)
                if exp.noise_variance < 0:
                    raise r.error(section, key, "must be >= 0")
                continue
            idx = _index_key(key, section, r)
            recs = r.records(section, key, 3)
            target[idx] = r.build(section, key, lambda: ArrayGeometry(tuple(recs)))

    if r.cp.has_section("paths"):
        s = "paths"
        for key in r.cp.options(s):
            parts = key.split(".")
            kind = parts[0]
            if kind == "direct" and len(parts) == 3 and parts[1].isdigit() and parts[2].isdigit():
                recs = r.records(s, key, 6)
                exp.direct[(int(parts[1]), int(parts[2]))] = tuple(
                    DirectPath(rad(a), rad(b), rad(c), rad(d), complex(re_, im)) for a, b, c, d, re_, im in recs
                )
            elif kind == "incident" and len(parts) == 2 and parts[1].isdigit():
                recs = r.records(s, key, 7)
                exp.incident[int(parts[1])] = r.build(s, key, lambda: tuple(
                    IncidentPath(rad(a), rad(b), AngleTriple(rad(t), rad(p), rad(pol)), complex(re_, im))
                    for a, b, t, p, pol, re_, im in recs
                ))
            elif kind == "outgoing" and len(parts) == 2 and parts[1].isdigit():
                recs = r.records(s, key, 6)
                exp.outgoing[int(parts[1])] = r.build(s, key, lambda: tuple(
                    OutgoingPath(AnglePair(rad(t), rad(p)), rad(c), rad(d), complex(re_, im))
                    for t, p, c, d, re_, im in recs
                ))
            else:
                raise r.error(s, key, "expected direct.<rx>.<tx>, incident.<tx> or outgoing.<rx>")

    if r.cp.has_section("objective"):
        s = "objective"
        spec = ObjectiveSpec()
        if r.has(s, "kind"):
            spec.kind = r.raw(s, "kind").strip()
        spec.isotropic = r.boolean(s, "isotropic", False)
        transmit = {}
        for key in r.cp.options(s):
            if key.startswith("transmit."):
                idx = _index_key(key.split(".", 1)[1], s, r)
                transmit[idx] = r.numbers(s, key, cast=lambda v: complex(v.replace(" ", "")))
        spec.transmit = transmit or None
        if r.has(s, "algorithm"):
            spec.algorithm = r.raw(s, "algorithm").strip()
            if spec.algorithm not in ALGORITHMS:
                raise r.error(s, "algorithm", f"expected one of {ALGORITHMS}")
        spec.budget = r.number(s, "budget", DEFAULT_BUDGET, cast=int)
        spec.passes = r.number(s, "passes", 10, cast=int)
        spec.restarts = r.number(s, "restarts", 0, cast=int)
        if spec.passes < 1:
            raise r.error(s, "passes", "must be >= 1")
        exp.objective = spec
        r.build(s, "kind", exp.objective_obj)

    if r.cp.has_section("sweep"):
        s = "sweep"
        sw = SweepSpec()
        if r.has(s, "variable"):
            sw.variable = r.raw(s, "variable").strip()
            if sw.variable not in SWEEP_VARIABLES:
                raise r.error(s, "variable", f"expected one of {SWEEP_VARIABLES}")
        conv = float if sw.variable == "beta_x" else rad
        if r.has(s, "range"):
            start, stop, step = r.numbers(s, "range", 3)
            if not step > 0:
                raise r.error(s, "range", "step must be > 0")
            if stop < start:
                raise r.error(s, "range", "range bounds must be ordered (start <= stop)")
            sw.start, sw.stop, sw.step = conv(start), conv(stop), conv(step)
        if r.has(s, "incident"):
            sw.theta_t, sw.phi_t, sw.phi_pol = (rad(v) for v in r.numbers(s, "incident", 3))
        if r.has(s, "observation"):
            sw.theta_r, sw.phi_r = (rad(v) for v in r.numbers(s, "observation", 2))
        if r.has(s, "mode"):
            m = r.numbers(s, "mode", 3)
            sw.mode = r.build(s, "mode", lambda: TransmissionMode(*m))
        elif r.has(s, "target"):
            tt, tp, rt, rp = (rad(v) for v in r.numbers(s, "target", 4))
            beta0 = rad(r.number(s, "beta0", 0.0))
            sw.mode = r.build(s, "target", lambda: mode_from_directions(
                AngleTriple(tt, tp, 0.0), AnglePair(rt, rp), beta0))
        if r.has(s, "variants"):
            sw.variants = tuple(v.strip() for v in r.raw(s, "variants").split(",") if v.strip())
            r.build(s, "variants", lambda: variant_names_valid(sw.variants))
        exp.sweep = sw
        _validate_sweep(exp, r)

    return exp


def _validate_sweep(exp: Experiment, r: _Reader) -> None:
    sw = exp.sweep
    if sw.variable == "theta_r":
        lo, hi = (sw.start, sw.stop)
        if not (0.0 <= lo and hi <= math.pi / 2 + 1e-12):
            raise r.error("sweep", "range", "theta_r must stay within [0, 90] degrees")
    elif sw.variable == "theta_t":
        if not (0.0 <= sw.start and sw.stop < math.pi / 2):
            raise r.error("sweep", "range", "theta_t must stay within [0, 90) degrees (grazing excluded)")
    elif not (-1.0 <= sw.start and sw.stop <= 1.0):
        raise r.error("sweep", "range", "beta_x must stay within [-1, 1]")
    r.build("sweep", "incident", lambda: AngleTriple(sw.theta_t, sw.phi_t, sw.phi_pol))
    r.build("sweep", "observation", lambda: AnglePair(sw.theta_r, sw.phi_r))
    needs_lattice = [v for v in sw.variants if v != "continuous"]
    if needs_lattice and exp.cell_spacing is None:
        raise r.error("sweep", "variants", f"{needs_lattice} need [irs] cell_spacing")
    if "discrete-gap" in sw.variants and exp.gap_cell_edge is None:
        raise r.error("sweep", "variants", "discrete-gap needs [irs] gap_cell_edge")


def load(path: str, angle_unit: str = "deg") -> Experiment:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), source=str(path), angle_unit=angle_unit)


def _deg(x: float) -> float:
    """Shortest degree value that converts back to exactly ``x`` radians."""
    d = math.degrees(x)
    for digits in range(18):
        candidate = round(d, digits)
        if math.radians(candidate) == x:
            return candidate
    return d


def _fmt(x) -> str:
    if isinstance(x, complex):
        return repr(x)
    return repr(float(x)) if isinstance(x, float) else str(x)


def _join(values) -> str:
    return ", ".join(_fmt(v) for v in values)


def _records(recs) -> str:
    return "\n" + "\n".join("    " + _join(rec) for rec in recs) if recs else ""


def dumps(exp: Experiment) -> str:
    """Serialize an experiment back to text (angles in degrees)."""
    deg = _deg
    out = ["[wave]", f"wavelength = {_fmt(exp.wave.wavelength)}", f"seed = {exp.seed}", ""]
    if exp.tile is not None:
        out += ["[irs]", f"tile_size = {_join((exp.tile.L_x, exp.tile.L_y))}",
                f"rho_eff = {_fmt(exp.tile.rho_eff)}", f"model = {exp.model}"]
        if exp.cell_spacing is not None:
            out.append(f"cell_spacing = {_join(exp.cell_spacing)}")
        if exp.cell_edge is not None:
            out.append(f"cell_edge = {_fmt(exp.cell_edge)}")
        if exp.phase_bits is not None:
            out.append(f"phase_bits = {exp.phase_bits}")
        if exp.gap_cell_edge is not None:
            out.append(f"gap_cell_edge = {_fmt(exp.gap_cell_edge)}")
        out.append("")
    if exp.positions:
        out += ["[tiles]", f"positions = {_records(exp.positions)}"]
        if exp.selection is not None:
            out.append(f"selection = {_join(exp.selection)}")
        out.append("")
    if exp.codebook is not None:
        modes = [(m.beta_bar_x, m.beta_bar_y, m.beta_bar_0) for m in exp.codebook.modes]
        out += ["[codebook]", f"modes = {_records(modes)}", ""]
    if exp.transmitters:
        out.append("[transmitters]")
        out += [f"{i} = {_records(exp.transmitters[i].element_positions)}" for i in sorted(exp.transmitters)]
        out.append("")
    if exp.receivers or exp.noise_variance:
        out += ["[receivers]", f"noise_variance = {_fmt(float(exp.noise_variance))}"]
        out += [f"{j} = {_records(exp.receivers[j].element_positions)}" for j in sorted(exp.receivers)]
        out.append("")
    if exp.direct or exp.incident or exp.outgoing:
        out.append("[paths]")
        for (j, i), paths in sorted(exp.direct.items()):
            recs = [(deg(p.aod_theta), deg(p.aod_phi), deg(p.aoa_theta), deg(p.aoa_phi),
                     float(complex(p.gain).real), float(complex(p.gain).imag)) for p in paths]
            out.append(f"direct.{j}.{i} = {_records(recs)}")
        for i, paths in sorted(exp.incident.items()):
            recs = [(deg(p.aod_theta), deg(p.aod_phi), deg(p.irs.theta_t), deg(p.irs.phi_t),
                     deg(p.irs.phi_pol), float(complex(p.gain).real), float(complex(p.gain).imag))
                    for p in paths]
            out.append(f"incident.{i} = {_records(recs)}")
        for j, paths in sorted(exp.outgoing.items()):
            recs = [(deg(p.irs.theta_r), deg(p.irs.phi_r), deg(p.aoa_theta), deg(p.aoa_phi),
                     float(complex(p.gain).real), float(complex(p.gain).imag)) for p in paths]
            out.append(f"outgoing.{j} = {_records(recs)}")
        out.append("")
    if exp.objective is not None:
        o = exp.objective
        out += ["[objective]", f"kind = {o.kind}", f"isotropic = {'true' if o.isotropic else 'false'}"]
        for i, vec in sorted((o.transmit or {}).items()):
            out.append(f"transmit.{i} = {_join(vec)}")
        out += [f"algorithm = {o.algorithm}", f"budget = {o.budget}", f"passes = {o.passes}",
                f"restarts = {o.restarts}", ""]
    if exp.sweep is not None:
        sw = exp.sweep
        conv = float if sw.variable == "beta_x" else deg
        out += [
            "[sweep]",
            f"variable = {sw.variable}",
            f"range = {_join((conv(sw.start), conv(sw.stop), conv(sw.step)))}",
            f"incident = {_join((deg(sw.theta_t), deg(sw.phi_t), deg(sw.phi_pol)))}",
            f"observation = {_join((deg(sw.theta_r), deg(sw.phi_r)))}",
            f"mode = {_join((sw.mode.beta_bar_x, sw.mode.beta_bar_y, sw.mode.beta_bar_0))}",
            f"variants = {', '.join(sw.variants)}",
            "",
        ]
    return "\n".join(line.rstrip() for line in out)


def config_hash(exp: Experiment) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(dumps(exp).encode("utf-8")).hexdigest()
