"""Derivative-free design optimization of the effective susceptibility.

The objective is omega_effective at the detected flat-top (RMS-based): the
pointwise susceptibility is trivially zero at any stationary point, so only
the RMS form captures the peak curvature that gate errors actually feel.
Each candidate design is scored with an adaptive two-stage sweep (coarse
11-point grid plus 7 refinement points around the detected peak, 18 solves
total), and a minimum-coupling constraint J* >= J_min is enforced through a
fixed infeasibility penalty.

The search itself is a deterministic Nelder-Mead simplex: the first vertex
sits at the midpoint of every parameter's bounds and the remaining vertices
are constructed in parameter order, so identical problems produce identical
traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ExchangeCurve,
    SolverSettings,
    find_flattop,
    rms_coupling_error,
    sweep_exchange,
)
from .device import V_MAX, DeviceLayout
from .errors import ConfigError, InfeasibleError, SimulationError

# Penalty weight applied to constraint violations (ueV^-1 in the J* term).
PENALTY = 1.0e6

# Fraction of each bound range used to offset the non-midpoint vertices.
INITIAL_STEP = 0.25

# Simplex coefficients: reflection, expansion, contraction, shrink.
RHO, CHI, GAMMA, SIGMA = 1.0, 2.0, 0.5, 0.5

COARSE_POINTS = 11
REFINE_POINTS = 7


@dataclass(frozen=True)
class DesignProblem:
    """Bounded named parameters, an error objective, and a coupling floor."""

    parameters: tuple[tuple[str, float, float], ...]  # (name, low, high)
    j_min: float            # ueV
    budget: int
    delta: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "parameters",
                           tuple((str(n), float(a), float(b))
                                 for n, a, b in self.parameters))
        if not self.parameters:
            raise ConfigError("optimization needs at least one free parameter")
        names = [p[0] for p in self.parameters]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate parameter names")
        for name, lo, hi in self.parameters:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError(f"parameter {name!r}: bounds must be finite with low < high")
        if self.j_min <= 0:
            raise ConfigError("j_min must be > 0")
        if self.budget < len(self.parameters) + 2:
            raise ConfigError(
                f"budget {self.budget} below minimum {len(self.parameters) + 2}"
            )
        if not (0 < self.delta < 1):
            raise ConfigError("delta must be in (0, 1)")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.parameters)


@dataclass(frozen=True)
class Evaluation:
    """One scored design point."""

    parameters: dict
    omega_effective: float   # inf when no flat-top exists
    j_star: float            # ueV; best available estimate
    feasible: bool


@dataclass(frozen=True)
class DesignResult:
    """Optimization outcome with the full evaluation trace."""

    best_parameters: dict
    best_omega_effective: float
    best_j_star: float
    trace: tuple[Evaluation, ...]
    termination: str         # "budget" or "converged"

    def trace_csv(self) -> str:
        names = sorted(self.best_parameters)
        header = "eval," + ",".join(f"param_{n}" for n in names) \
            + ",omega_eff,J_star_ueV,feasible"
        lines = [header]
        for i, ev in enumerate(self.trace):
            vals = ",".join(f"{ev.parameters[n]:.17g}" for n in names)
            lines.append(f"{i},{vals},{ev.omega_effective:.17g},"
                         f"{ev.j_star:.17g},{int(ev.feasible)}")
        return "\n".join(lines) + "\n"


def _adaptive_curve(layout: DeviceLayout,
                    settings: SolverSettings) -> ExchangeCurve:
    """Coarse sweep plus refinement around the discrete peak."""
    coarse = np.linspace(0.0, V_MAX, COARSE_POINTS)
    curve = sweep_exchange(layout, coarse, settings)
    imax = int(np.argmax(curve.j))
    if imax == 0 or imax == len(coarse) - 1:
        return curve
    h = coarse[1] - coarse[0]
    center = curve.v[imax]
    fine = center + h * np.arange(-4, 5) / 4.0
    existing = set(np.round(curve.v, 12))
    extra = [v for v in fine if np.round(v, 12) not in existing
             and 0.0 <= v <= V_MAX]
    if len(extra) > REFINE_POINTS:
        extra = extra[:REFINE_POINTS]
    refined = sweep_exchange(layout, sorted(extra), settings)
    merged = sorted(set(curve.points) | set(refined.points))
    return ExchangeCurve(points=tuple(merged), fingerprint=curve.fingerprint,
                         voltage_swing=curve.voltage_swing)


def evaluate_design(parameters: dict, layout_template, j_min: float,
                    settings: SolverSettings = SolverSettings(),
                    delta: float = 0.01) -> Evaluation:
    """Score one design.  ``layout_template`` maps keyword parameters to a
    DeviceLayout.  A missing flat-top (or a sweep that violates physical
    bounds) yields an infeasible evaluation, not an exception."""
    layout = layout_template(**parameters)
    try:
        curve = _adaptive_curve(layout, settings)
    except SimulationError:
        return Evaluation(parameters=dict(parameters),
                          omega_effective=float("inf"),
                          j_star=0.0, feasible=False)
    try:
        v_star, j_star, _ = find_flattop(curve)
        rms = rms_coupling_error(curve, v_star, delta)
    except SimulationError:
        return Evaluation(parameters=dict(parameters),
                          omega_effective=float("inf"),
                          j_star=float(curve.j.max()), feasible=False)
    omega_eff = rms / delta
    return Evaluation(parameters=dict(parameters), omega_effective=omega_eff,
                      j_star=j_star, feasible=bool(j_star >= j_min))


def _penalized(ev: Evaluation, j_min: float) -> float:
    if ev.feasible:
        return ev.omega_effective
    if not np.isfinite(ev.omega_effective):
        # No flat-top at all: worse than any constraint violation.
        return PENALTY * (1.0 + j_min)
    return ev.omega_effective + PENALTY * (j_min - ev.j_star)


def optimize_design(problem: DesignProblem, evaluator) -> DesignResult:
    """Minimize ``evaluator`` over the problem box with Nelder-Mead.

    ``evaluator(parameters: dict) -> Evaluation`` is typically a closure
    over ``evaluate_design``; it is injected so the search can be exercised
    with synthetic objectives.  Candidates are clipped to the bounds before
    evaluation and repeated vertices reuse cached scores without consuming
    budget.
    """
    names = problem.names
    lows = np.array([p[1] for p in problem.parameters])
    highs = np.array([p[2] for p in problem.parameters])
    ranges = highs - lows
    dim = len(names)

    trace: list[Evaluation] = []
    cache: dict[tuple, Evaluation] = {}

    def score(x: np.ndarray) -> float:
        x = np.clip(x, lows, highs)
        key = tuple(np.round(x, 12))
        if key not in cache:
            if len(trace) >= problem.budget:
                raise _BudgetExhausted
            ev = evaluator(dict(zip(names, map(float, x))))
            cache[key] = ev
            trace.append(ev)
        return _penalized(cache[key], problem.j_min)

    # Initial simplex: bound midpoints, then one step along each axis.
    mid = 0.5 * (lows + highs)
    simplex = [mid.copy()]
    for i in range(dim):
        v = mid.copy()
        v[i] = min(mid[i] + INITIAL_STEP * ranges[i], highs[i])
        simplex.append(v)
    simplex = np.array(simplex)

    termination = "budget"
    try:
        values = np.array([score(x) for x in simplex])
        while True:
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            diam = np.max(np.abs(simplex - simplex[0]) / ranges)
            if diam < 1e-3:
                termination = "converged"
                break
            centroid = simplex[:-1].mean(axis=0)
            xr = centroid + RHO * (centroid - simplex[-1])
            fr = score(xr)
            if fr < values[0]:
                xe = centroid + CHI * (xr - centroid)
                fe = score(xe)
                if fe < fr:
                    simplex[-1], values[-1] = xe, fe
                else:
                    simplex[-1], values[-1] = xr, fr
            elif fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
            else:
                xc = centroid + GAMMA * (simplex[-1] - centroid)
                fc = score(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                else:
                    for i in range(1, dim + 1):
                        simplex[i] = simplex[0] + SIGMA * (simplex[i] - simplex[0])
                        values[i] = score(simplex[i])
    except _BudgetExhausted:
        termination = "budget"

    feasible = [ev for ev in trace if ev.feasible]
    if not feasible:
        raise InfeasibleError(
            "no feasible design found within the evaluation budget",
            trace=tuple(trace),
        )
    best = min(feasible, key=lambda ev: ev.omega_effective)
    return DesignResult(
        best_parameters=dict(best.parameters),
        best_omega_effective=best.omega_effective,
        best_j_star=best.j_star,
        trace=tuple(trace),
        termination=termination,
    )


class _BudgetExhausted(Exception):
    pass


def incumbent_history(result: DesignResult) -> list[float]:
    """Running best feasible objective over the trace (non-increasing)."""
    out = []
    best = float("inf")
    for ev in result.trace:
        if ev.feasible and ev.omega_effective < best:
            best = ev.omega_effective
        out.append(best)
    return out
