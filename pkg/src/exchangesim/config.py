"""Configuration documents: parse, validate, and serialize run specs.

Configs are YAML with one hard rule: every physical quantity carries a unit
suffix ("-300 mV", "40 nm", "1 ueV").  Bare numbers for unit-bearing keys
are rejected so a voltage can never be silently misread as nanometers.
Unknown keys are errors, not warnings.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .analysis import SolverSettings
from .device import V_MAX, DeviceLayout, GateElement, MaterialParams
from .errors import ConfigError
from .reference import BUILTIN_GRIDS, BUILTIN_LAYOUTS, REFERENCE_ORBITALS

COMMANDS = ("sweep", "analyze", "optimize", "validate", "export-potential")

# unit -> (dimension, scale to canonical).  Canonical units: mV, nm, ueV.
_UNITS = {
    "mV": ("voltage", 1.0),
    "V": ("voltage", 1000.0),
    "nm": ("length", 1.0),
    "um": ("length", 1000.0),
    "ueV": ("energy", 1.0),
    "meV": ("energy", 1000.0),
}
_CANONICAL = {"voltage": "mV", "length": "nm", "energy": "ueV"}


def parse_quantity(value, dimension: str, key: str) -> float:
    """Parse "<number> <unit>" enforcing the expected dimension."""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"{key}: expected a quantity string, got {value!r}")
    if isinstance(value, (int, float)):
        raise ConfigError(
            f"{key}: missing unit on {value!r} "
            f"(write e.g. '{value} {_CANONICAL[dimension]}')"
        )
    parts = value.split()
    if len(parts) != 2:
        raise ConfigError(
            f"{key}: malformed quantity {value!r} (expected '<number> <unit>')"
        )
    num, unit = parts
    try:
        magnitude = float(num)
    except ValueError:
        raise ConfigError(f"{key}: bad number in quantity {value!r}") from None
    if unit not in _UNITS:
        raise ConfigError(f"{key}: unknown unit {unit!r} in {value!r}")
    dim, scale = _UNITS[unit]
    if dim != dimension:
        raise ConfigError(
            f"{key}: unit {unit!r} has dimension {dim}, expected {dimension}"
        )
    return magnitude * scale


def format_quantity(magnitude: float, dimension: str) -> str:
    return f"{magnitude:.17g} {_CANONICAL[dimension]}"


def _require_mapping(node, key):
    if not isinstance(node, dict):
        raise ConfigError(f"{key}: expected a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: dict, allowed, key):
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise ConfigError(f"{key}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _get_number(node, key, ctx, default, kind=float, low=None, high=None):
    value = node.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{ctx}.{key}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{ctx}.{key}: expected an integer, got {value!r}")
    value = kind(value)
    if low is not None and value < low:
        raise ConfigError(f"{ctx}.{key}: {value} below minimum {low}")
    if high is not None and value > high:
        raise ConfigError(f"{ctx}.{key}: {value} above maximum {high}")
    return value


@dataclass(frozen=True)
class AnalysisSettings:
    """Sweep grid and error-budget parameters."""

    delta: float = 0.01
    v_min: float = 0.0
    v_max: float = V_MAX
    v_points: int = 23
    refine_peak: bool = True
    control: float = 1.0   # operating point for export-potential

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ConfigError("analysis.delta must be in (0, 1)")
        if not (0.0 <= self.v_min < self.v_max <= V_MAX):
            raise ConfigError(
                f"analysis v-range must satisfy 0 <= v_min < v_max <= {V_MAX}"
            )
        if self.v_points < 5:
            raise ConfigError("analysis.v_points must be at least 5")
        if not (0.0 <= self.control <= V_MAX):
            raise ConfigError(f"analysis.control must be in [0, {V_MAX}]")


@dataclass(frozen=True)
class OptimizeSettings:
    """Free parameters and constraints for the design search."""

    parameters: tuple[tuple[str, float, float], ...]
    j_min: float = 1.0     # ueV
    budget: int = 40

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(map(tuple, self.parameters)))
        if not self.parameters:
            raise ConfigError("optimize.parameters must name at least one parameter")
        if self.j_min <= 0:
            raise ConfigError("optimize.j_min must be > 0")
        if self.budget < len(self.parameters) + 2:
            raise ConfigError("optimize.budget below simplex minimum")


@dataclass(frozen=True)
class RunSpec:
    """A fully resolved run: command, device, and all settings."""

    command: str
    layout_name: str | None
    layout: DeviceLayout
    solver: SolverSettings
    analysis: AnalysisSettings
    optimize: OptimizeSettings | None
    output: str = "out"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(
                f"unknown command {self.command!r}; expected one of {COMMANDS}"
            )
        if self.command == "optimize" and self.optimize is None:
            raise ConfigError("command 'optimize' requires an 'optimize' section")


def _parse_material(node, ctx) -> MaterialParams:
    node = _require_mapping(node, ctx)
    _check_keys(node, ("effective_mass", "relative_permittivity",
                       "dot_depth", "softening_length"), ctx)
    kwargs = {}
    if "effective_mass" in node:
        kwargs["effective_mass"] = _get_number(node, "effective_mass", ctx, None)
    if "relative_permittivity" in node:
        kwargs["relative_permittivity"] = _get_number(
            node, "relative_permittivity", ctx, None)
    if "dot_depth" in node:
        kwargs["dot_depth"] = parse_quantity(node["dot_depth"], "length",
                                             f"{ctx}.dot_depth")
    if "softening_length" in node:
        kwargs["softening_length"] = parse_quantity(
            node["softening_length"], "length", f"{ctx}.softening_length")
    return MaterialParams(**kwargs)


def _parse_gate(node, ctx) -> GateElement:
    node = _require_mapping(node, ctx)
    _check_keys(node, ("name", "role", "footprint", "voltage_off", "voltage_on"),
                ctx)
    for req in ("role", "footprint", "voltage_off", "voltage_on"):
        if req not in node:
            raise ConfigError(f"{ctx}: missing required key {req!r}")
    fp = node["footprint"]
    if not isinstance(fp, list) or len(fp) != 4:
        raise ConfigError(
            f"{ctx}.footprint: expected [x_min, x_max, y_min, y_max]"
        )
    coords = [parse_quantity(v, "length", f"{ctx}.footprint[{i}]")
              for i, v in enumerate(fp)]
    return GateElement(
        x_min=coords[0], x_max=coords[1], y_min=coords[2], y_max=coords[3],
        voltage_off=parse_quantity(node["voltage_off"], "voltage",
                                   f"{ctx}.voltage_off"),
        voltage_on=parse_quantity(node["voltage_on"], "voltage",
                                  f"{ctx}.voltage_on"),
        role=node["role"],
        name=str(node.get("name", "")),
    )


def _parse_layout(node) -> tuple[str | None, DeviceLayout]:
    if isinstance(node, str):
        if node not in BUILTIN_LAYOUTS:
            raise ConfigError(
                f"layout: unknown built-in {node!r}; "
                f"available: {sorted(BUILTIN_LAYOUTS)}"
            )
        return node, BUILTIN_LAYOUTS[node]()
    node = _require_mapping(node, "layout")
    _check_keys(node, ("material", "domain", "gates", "background_offset"),
                "layout")
    for req in ("domain", "gates"):
        if req not in node:
            raise ConfigError(f"layout: missing required key {req!r}")
    dom = node["domain"]
    if not isinstance(dom, list) or len(dom) != 4:
        raise ConfigError("layout.domain: expected [x_min, x_max, y_min, y_max]")
    domain = tuple(parse_quantity(v, "length", f"layout.domain[{i}]")
                   for i, v in enumerate(dom))
    gates_node = node["gates"]
    if not isinstance(gates_node, list) or not gates_node:
        raise ConfigError("layout.gates: expected a non-empty list")
    gates = tuple(_parse_gate(g, f"layout.gates[{i}]")
                  for i, g in enumerate(gates_node))
    material = (_parse_material(node["material"], "layout.material")
                if "material" in node else MaterialParams())
    offset = (parse_quantity(node["background_offset"], "voltage",
                             "layout.background_offset")
              if "background_offset" in node else 0.0)
    return None, DeviceLayout(gates=gates, material=material, domain=domain,
                              background_offset=offset)


def _parse_solver(node, layout_name) -> SolverSettings:
    if layout_name in BUILTIN_GRIDS:
        default_grid = BUILTIN_GRIDS[layout_name]
        default_orbitals = REFERENCE_ORBITALS
    else:
        default_grid = (SolverSettings.nx, SolverSettings.ny)
        default_orbitals = SolverSettings.n_orbitals
    if node is None:
        return SolverSettings(nx=default_grid[0], ny=default_grid[1],
                              n_orbitals=default_orbitals)
    node = _require_mapping(node, "solver")
    _check_keys(node, ("grid", "orbitals", "eig_tol", "hf_refine", "hf_mix",
                       "interaction_scale"), "solver")
    grid = node.get("grid")
    if grid is None:
        nx, ny = default_grid
    elif isinstance(grid, int) and not isinstance(grid, bool):
        nx = ny = grid
    elif isinstance(grid, list) and len(grid) == 2 \
            and all(isinstance(g, int) and not isinstance(g, bool) for g in grid):
        nx, ny = grid
    else:
        raise ConfigError("solver.grid: expected an integer or [nx, ny]")
    hf_refine = node.get("hf_refine", False)
    if not isinstance(hf_refine, bool):
        raise ConfigError("solver.hf_refine: expected true/false")
    return SolverSettings(
        nx=nx, ny=ny,
        n_orbitals=_get_number(node, "orbitals", "solver", default_orbitals,
                               kind=int, low=2),
        eig_tol=_get_number(node, "eig_tol", "solver", 1e-10, low=0.0),
        hf_refine=hf_refine,
        hf_mix=_get_number(node, "hf_mix", "solver", 0.5, low=0.0, high=1.0),
        interaction_scale=_get_number(node, "interaction_scale", "solver", 1.0,
                                      low=0.0),
    )


def _parse_analysis(node) -> AnalysisSettings:
    if node is None:
        return AnalysisSettings()
    node = _require_mapping(node, "analysis")
    _check_keys(node, ("delta", "v_min", "v_max", "v_points", "refine_peak",
                       "control"), "analysis")
    refine = node.get("refine_peak", True)
    if not isinstance(refine, bool):
        raise ConfigError("analysis.refine_peak: expected true/false")
    return AnalysisSettings(
        delta=_get_number(node, "delta", "analysis", 0.01),
        v_min=_get_number(node, "v_min", "analysis", 0.0),
        v_max=_get_number(node, "v_max", "analysis", V_MAX),
        v_points=_get_number(node, "v_points", "analysis", 23, kind=int),
        refine_peak=refine,
        control=_get_number(node, "control", "analysis", 1.0),
    )


def _parse_optimize(node) -> OptimizeSettings | None:
    if node is None:
        return None
    node = _require_mapping(node, "optimize")
    _check_keys(node, ("parameters", "j_min", "budget"), "optimize")
    params_node = node.get("parameters")
    if not isinstance(params_node, list) or not params_node:
        raise ConfigError("optimize.parameters: expected a non-empty list")
    params = []
    for i, p in enumerate(params_node):
        ctx = f"optimize.parameters[{i}]"
        p = _require_mapping(p, ctx)
        _check_keys(p, ("name", "min", "max"), ctx)
        for req in ("name", "min", "max"):
            if req not in p:
                raise ConfigError(f"{ctx}: missing required key {req!r}")
        params.append((str(p["name"]),
                       parse_quantity(p["min"], "voltage", f"{ctx}.min"),
                       parse_quantity(p["max"], "voltage", f"{ctx}.max")))
    j_min = (parse_quantity(node["j_min"], "energy", "optimize.j_min")
             if "j_min" in node else 1.0)
    return OptimizeSettings(
        parameters=tuple(params), j_min=j_min,
        budget=_get_number(node, "budget", "optimize", 40, kind=int, low=3),
    )


def parse_config(text: str) -> RunSpec:
    """Parse a configuration document into a fully resolved RunSpec."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration is not valid YAML: {exc}") from exc
    if doc is None:
        raise ConfigError("empty configuration document")
    doc = _require_mapping(doc, "config")
    _check_keys(doc, ("command", "layout", "solver", "analysis", "optimize",
                      "output"), "config")
    if "layout" not in doc:
        raise ConfigError("config: missing required key 'layout'")
    command = doc.get("command", "sweep")
    if not isinstance(command, str):
        raise ConfigError(f"command: expected a string, got {command!r}")
    layout_name, layout = _parse_layout(doc["layout"])
    output = doc.get("output", "out")
    if not isinstance(output, str) or not output:
        raise ConfigError("output: expected a non-empty path string")
    return RunSpec(
        command=command,
        layout_name=layout_name,
        layout=layout,
        solver=_parse_solver(doc.get("solver"), layout_name),
        analysis=_parse_analysis(doc.get("analysis")),
        optimize=_parse_optimize(doc.get("optimize")),
        output=output,
    )


def serialize(spec: RunSpec) -> str:
    """Render a RunSpec back to configuration text.

    The output is fully explicit (all defaults spelled out), so
    parse(serialize(parse(x))) == parse(x).
    """
    doc: dict = {"command": spec.command}
    if spec.layout_name is not None:
        doc["layout"] = spec.layout_name
    else:
        lay = spec.layout
        doc["layout"] = {
            "material": {
                "effective_mass": lay.material.effective_mass,
                "relative_permittivity": lay.material.relative_permittivity,
                "dot_depth": format_quantity(lay.material.dot_depth, "length"),
                "softening_length": format_quantity(
                    lay.material.softening_length, "length"),
            },
            "domain": [format_quantity(v, "length") for v in lay.domain],
            "background_offset": format_quantity(lay.background_offset,
                                                 "voltage"),
            "gates": [
                {
                    "name": g.name,
                    "role": g.role,
                    "footprint": [format_quantity(v, "length") for v in
                                  (g.x_min, g.x_max, g.y_min, g.y_max)],
                    "voltage_off": format_quantity(g.voltage_off, "voltage"),
                    "voltage_on": format_quantity(g.voltage_on, "voltage"),
                }
                for g in lay.gates
            ],
        }
    doc["solver"] = {
        "grid": [spec.solver.nx, spec.solver.ny],
        "orbitals": spec.solver.n_orbitals,
        "eig_tol": spec.solver.eig_tol,
        "hf_refine": spec.solver.hf_refine,
        "hf_mix": spec.solver.hf_mix,
        "interaction_scale": spec.solver.interaction_scale,
    }
    doc["analysis"] = {
        "delta": spec.analysis.delta,
        "v_min": spec.analysis.v_min,
        "v_max": spec.analysis.v_max,
        "v_points": spec.analysis.v_points,
        "refine_peak": spec.analysis.refine_peak,
        "control": spec.analysis.control,
    }
    if spec.optimize is not None:
        doc["optimize"] = {
            "parameters": [
                {"name": n, "min": format_quantity(lo, "voltage"),
                 "max": format_quantity(hi, "voltage")}
                for n, lo, hi in spec.optimize.parameters
            ],
            "j_min": format_quantity(spec.optimize.j_min, "energy"),
            "budget": spec.optimize.budget,
        }
    doc["output"] = spec.output
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)
