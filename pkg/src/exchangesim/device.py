"""Gate-defined device model: layouts, control mapping, confinement potentials.

All lengths are in nm, voltages in mV, energies in meV.  The electrostatic
potential of a rectangular top gate is evaluated a distance ``dot_depth``
below a pinned surface (the classic analytic solution of the half-space
Dirichlet problem), and gate contributions superpose linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

GATE_ROLES = ("plunger", "channel", "barrier")

# Slight overshoot allowed past the nominal "on" point so peak refinement
# can bracket a maximum near v = 1.
V_MAX = 1.1


@dataclass(frozen=True)
class MaterialParams:
    """Effective-mass plane parameters of the host heterostructure."""

    effective_mass: float = 0.19       # multiple of the free-electron mass
    relative_permittivity: float = 11.9
    dot_depth: float = 40.0            # nm, gate plane to electron plane
    softening_length: float = 6.0      # nm, in-plane Coulomb regularization

    def __post_init__(self):
        if self.effective_mass <= 0:
            raise ConfigError("effective_mass must be > 0")
        if self.relative_permittivity < 1:
            raise ConfigError("relative_permittivity must be >= 1")
        if self.dot_depth <= 0:
            raise ConfigError("dot_depth must be > 0")
        if self.softening_length <= 0:
            raise ConfigError("softening_length must be > 0")


@dataclass(frozen=True)
class GateElement:
    """Rectangular top gate with an off/on voltage pair.

    Channel gates keep a constant voltage; plunger gates swing affinely
    with the normalized control voltage.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    voltage_off: float  # mV
    voltage_on: float   # mV
    role: str
    name: str = ""

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError(f"gate {self.name!r}: degenerate footprint")
        if self.role not in GATE_ROLES:
            raise ConfigError(f"gate {self.name!r}: unknown role {self.role!r}")
        if self.role == "channel" and self.voltage_off != self.voltage_on:
            raise ConfigError(
                f"gate {self.name!r}: channel gates keep a constant voltage"
            )


@dataclass(frozen=True)
class DeviceLayout:
    """A gate arrangement over a rectangular simulation domain."""

    gates: tuple[GateElement, ...]
    material: MaterialParams
    domain: tuple[float, float, float, float]  # (x_min, x_max, y_min, y_max) nm
    background_offset: float = 0.0  # mV, uniform depletion offset

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        x0, x1, y0, y1 = self.domain
        if not (x0 < x1 and y0 < y1):
            raise ConfigError("degenerate simulation domain")
        for g in self.gates:
            if g.x_max < x0 or g.x_min > x1 or g.y_max < y0 or g.y_min > y1:
                raise ConfigError(
                    f"gate {g.name!r} footprint lies entirely outside the domain"
                )

    @property
    def plungers(self) -> tuple[GateElement, ...]:
        return tuple(g for g in self.gates if g.role == "plunger")

    def plunger_swing(self) -> float:
        """Largest |voltage_on - voltage_off| over the plunger gates, mV."""
        swings = [abs(g.voltage_on - g.voltage_off) for g in self.plungers]
        return max(swings) if swings else 0.0


@dataclass(frozen=True)
class ControlPoint:
    """Normalized control voltage: 0 = off (up-down), 1 = on (side-by-side)."""

    v: float

    def __post_init__(self):
        if not (0.0 <= self.v <= V_MAX):
            raise ConfigError(f"control voltage v={self.v} outside [0, {V_MAX}]")


@dataclass(frozen=True)
class PotentialGrid:
    """Discretized 2D confinement potential, energies in meV.

    ``values[i, j]`` is the potential energy at
    (x0 + i * spacing, y0 + j * spacing); grid nodes include both domain
    edges, so spacing = extent / (n - 1) along each axis.
    """

    nx: int
    ny: int
    spacing: float
    origin: tuple[float, float]
    values: np.ndarray = field(repr=False)
    provenance: str = "gate-model"

    def __post_init__(self):
        if self.spacing <= 0:
            raise ConfigError("grid spacing must be > 0")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.nx, self.ny):
            raise ConfigError(
                f"values shape {v.shape} != (nx, ny) = ({self.nx}, {self.ny})"
            )
        if not np.all(np.isfinite(v)):
            raise ConfigError("potential contains non-finite values")
        object.__setattr__(self, "values", v)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        x0, y0 = self.origin
        return (x0 + self.spacing * np.arange(self.nx),
                y0 + self.spacing * np.arange(self.ny))

    def to_text(self) -> str:
        """Plain-text export: header '# nx ny spacing_nm', one row per line."""
        lines = [f"# {self.nx} {self.ny} {self.spacing:.17g}"]
        for row in self.values:
            lines.append(" ".join(f"{x:.17g}" for x in row))
        return "\n".join(lines) + "\n"


def gate_potential(gate: GateElement, applied_voltage: float,
                   point, depth: float) -> float:
    """Potential energy (meV) of an electron at ``point`` due to one gate.

    Uses the analytic pinned-surface result for a rectangular gate held at
    ``applied_voltage`` on a grounded plane, evaluated ``depth`` nm below:

        phi(x, y) = (V_g / 2 pi) * sum over corners of
                    arctan(u w / (d sqrt(u^2 + w^2 + d^2)))

    and returns -e phi, i.e. -phi in meV for phi in mV.
    """
    if depth <= 0:
        raise ConfigError("depth must be > 0")
    x, y = point
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ConfigError("non-finite evaluation point")
    phi = applied_voltage * _coverage(gate, x, y, depth)
    return -phi


def _coverage(gate: GateElement, x, y, depth: float):
    """Fraction of the half-space solid angle subtended by the gate."""

    def g(u, w):
        return np.arctan2(u * w, depth * np.sqrt(u * u + w * w + depth * depth))

    u1, u2 = x - gate.x_min, gate.x_max - x
    w1, w2 = y - gate.y_min, gate.y_max - y
    return (g(u1, w1) + g(u1, w2) + g(u2, w1) + g(u2, w2)) / (2.0 * np.pi)


def interpolate_controls(layout: DeviceLayout,
                         control: ControlPoint) -> list[tuple[GateElement, float]]:
    """Map the normalized control voltage to per-gate applied voltages (mV).

    Plungers interpolate affinely between their off and on voltages;
    channel and barrier gates keep their fixed voltage.
    """
    v = control.v
    out = []
    for g in layout.gates:
        if g.role == "plunger":
            out.append((g, g.voltage_off + v * (g.voltage_on - g.voltage_off)))
        else:
            out.append((g, g.voltage_off))
    return out


def assemble_potential(layout: DeviceLayout, control: ControlPoint,
                       nx: int, ny: int) -> PotentialGrid:
    """Superpose all gate contributions on a uniform grid over the domain."""
    if nx < 16 or ny < 16:
        raise ConfigError("grid must be at least 16 x 16")
    x0, x1, y0, y1 = layout.domain
    hx = (x1 - x0) / (nx - 1)
    hy = (y1 - y0) / (ny - 1)
    if abs(hx - hy) > 1e-9 * max(hx, hy):
        raise ConfigError(
            f"domain/grid combination gives non-square cells (hx={hx}, hy={hy})"
        )
    xs = x0 + hx * np.arange(nx)
    ys = y0 + hy * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    depth = layout.material.dot_depth

    values = np.full((nx, ny), -layout.background_offset, dtype=float)
    for gate, voltage in interpolate_controls(layout, control):
        if voltage == 0.0:
            continue
        values -= voltage * _coverage(gate, X, Y, depth)
    return PotentialGrid(nx=nx, ny=ny, spacing=hx, origin=(x0, y0),
                         values=values, provenance="gate-model")


def model_double_well(separation: float, confinement_energy: float,
                      barrier_scale: float, nx: int, ny: int,
                      domain, effective_mass: float = 0.19) -> PotentialGrid:
    """Biquadratic double well used for oracle comparisons.

    V(x, y) = (m* w^2 / 2) (barrier_scale (x^2 - a^2)^2 / (4 a^2) + y^2)
    with hbar w = confinement_energy and 2 a = separation.  In the merged
    limit (separation -> 0 with barrier_scale adjusted) this reduces to an
    isotropic harmonic well of level spacing ``confinement_energy``.
    """
    from .constants import HBAR2_OVER_2ME

    if separation <= 0:
        raise ConfigError("separation must be > 0")
    if confinement_energy <= 0:
        raise ConfigError("confinement_energy must be > 0")
    x0, x1, y0, y1 = domain
    hx = (x1 - x0) / (nx - 1)
    hy = (y1 - y0) / (ny - 1)
    if abs(hx - hy) > 1e-9 * max(hx, hy):
        raise ConfigError("domain/grid combination gives non-square cells")
    xs = x0 + hx * np.arange(nx)
    ys = y0 + hy * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    # m* w^2 / 2 = (hbar w)^2 / (4 hbar^2/2m*)
    k = confinement_energy ** 2 / (4.0 * HBAR2_OVER_2ME / effective_mass)
    a = separation / 2.0
    values = k * (barrier_scale * (X * X - a * a) ** 2 / (4.0 * a * a) + Y * Y)
    return PotentialGrid(nx=nx, ny=ny, spacing=hx, origin=(x0, y0),
                         values=values, provenance="biquadratic-model")


def harmonic_well(confinement_energy: float, nx: int, ny: int, domain,
                  effective_mass: float = 0.19) -> PotentialGrid:
    """Isotropic 2D harmonic well with level spacing ``confinement_energy``."""
    from .constants import HBAR2_OVER_2ME

    x0, x1, y0, y1 = domain
    hx = (x1 - x0) / (nx - 1)
    xs = x0 + hx * np.arange(nx)
    ys = y0 + hx * np.arange(ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    k = confinement_energy ** 2 / (4.0 * HBAR2_OVER_2ME / effective_mass)
    values = k * (X * X + Y * Y)
    return PotentialGrid(nx=nx, ny=ny, spacing=hx, origin=(x0, y0),
                         values=values, provenance="biquadratic-model")


def grid_from_text(text: str, origin=(0.0, 0.0)) -> PotentialGrid:
    """Parse the plain-text matrix export format back into a grid."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ConfigError("missing '# nx ny spacing_nm' header line")
    parts = lines[0][1:].split()
    if len(parts) != 3:
        raise ConfigError("malformed grid header")
    nx, ny, spacing = int(parts[0]), int(parts[1]), float(parts[2])
    values = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    return PotentialGrid(nx=nx, ny=ny, spacing=spacing, origin=origin,
                         values=values, provenance="file")
