"""Run orchestration: command dispatch, result persistence, plot data.

Every run writes a single self-describing report plus per-command data
files into the output directory.  All writes are atomic (temp file in the
target directory, then rename), so an interrupted run never leaves a
partially written file at its final path.

Report grammar (one document per run):

    exchangesim-report 1
    <section>:
      <key>: <value>
      ...

Section headers are unindented and end with a colon; entries are two-space
indented ``key: value`` lines; every float uses 17 significant digits.  The
``wall_time_ns`` entry is the only nondeterministic field.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError,
    ExchangeCurve,
    SolverSettings,
    FAULT_TOLERANCE_RELAXED,
    FAULT_TOLERANCE_STRICT,
    fault_tolerance_margin,
    find_flattop,
    fit_exponential,
    report_at,
    signed_susceptibility,
    sweep_exchange,
)
from .config import RunSpec, serialize
from .device import ControlPoint, MaterialParams, assemble_potential, model_double_well, harmonic_well, gate_potential, GateElement
from .eigensolver import build_hamiltonian, lowest_eigenpairs
from .errors import ConfigError, SimulationError
from .optimizer import DesignProblem, evaluate_design, optimize_design
from .reference import BUILTIN_LAYOUTS
from .twoelectron import (
    brute_force_two_electron,
    exchange_splitting,
    two_site_exchange_closed_form,
    two_site_exchange_numeric,
)


@dataclass(frozen=True)
class RunReport:
    """Structured result of one run."""

    command: str
    fingerprint: str
    sections: tuple[tuple[str, tuple[tuple[str, object], ...]], ...]
    wall_time_ns: int
    all_passed: bool = True  # only meaningful for validate


def spec_fingerprint(spec: RunSpec) -> str:
    return hashlib.sha256(serialize(spec).encode()).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def render_report(report: RunReport) -> str:
    lines = ["exchangesim-report 1", "run:"]
    lines.append(f"  command: {report.command}")
    lines.append(f"  fingerprint: {report.fingerprint}")
    lines.append(f"  version: {__version__}")
    lines.append(f"  wall_time_ns: {report.wall_time_ns}")
    for name, entries in report.sections:
        lines.append(f"{name}:")
        for key, value in entries:
            lines.append(f"  {key}: {_fmt(value)}")
    return "\n".join(lines) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp-{os.getpid()}")
    try:
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def emit_plot_data(curve: ExchangeCurve, out_dir: str) -> None:
    """Write curve.csv, omega.csv, and a README describing both."""
    if len(curve.points) == 0:
        raise AnalysisError("refusing to emit plot data for an empty curve")
    atomic_write(os.path.join(out_dir, "curve.csv"), curve.to_csv())
    omega_lines = ["v,omega"]
    for v in curve.v[1:-1]:
        try:
            om = signed_susceptibility(curve, float(v))
        except AnalysisError:
            continue  # J <= 0 locally; omega undefined there
        omega_lines.append(f"{v:.17g},{om:.17g}")
    atomic_write(os.path.join(out_dir, "omega.csv"),
                 "\n".join(omega_lines) + "\n")
    readme = (
        "Plot data emitted by exchangesim.\n"
        "\n"
        "curve.csv: columns v, J_ueV.  v is the normalized control voltage\n"
        "(0 = off state, 1 = nominal on state); J_ueV is the exchange\n"
        "splitting E_triplet - E_singlet in micro-eV.\n"
        "\n"
        "omega.csv: columns v, omega.  omega is the signed log-derivative\n"
        "(v/J) dJ/dv estimated from a local quadratic; rows where J <= 0\n"
        "locally are omitted.  For a flat-topped curve omega crosses zero\n"
        "at the peak; for an exponential response it is roughly constant\n"
        "in the log-slope sense.\n"
    )
    atomic_write(os.path.join(out_dir, "README"), readme)


def _sweep_grid(spec: RunSpec) -> np.ndarray:
    a = spec.analysis
    return np.linspace(a.v_min, a.v_max, a.v_points)


def _refined_curve(spec: RunSpec, threads: int) -> ExchangeCurve:
    """Sweep the configured grid, then densify around an interior peak."""
    grid = _sweep_grid(spec)
    curve = sweep_exchange(spec.layout, grid, spec.solver, threads=threads)
    if not spec.analysis.refine_peak:
        return curve
    imax = int(np.argmax(curve.j))
    if imax == 0 or imax == len(grid) - 1:
        return curve
    h = grid[1] - grid[0]
    fine = curve.v[imax] + h * np.arange(-4, 5) / 4.0
    existing = set(np.round(curve.v, 12))
    extra = sorted(v for v in fine if np.round(v, 12) not in existing
                   and spec.analysis.v_min <= v <= spec.analysis.v_max)
    if not extra:
        return curve
    refined = sweep_exchange(spec.layout, extra, spec.solver, threads=threads)
    merged = sorted(set(curve.points) | set(refined.points))
    return ExchangeCurve(points=tuple(merged), fingerprint=curve.fingerprint,
                         voltage_swing=curve.voltage_swing)


def _curve_sections(curve: ExchangeCurve) -> list:
    sections = [("curve", (
        ("n_points", len(curve.points)),
        ("v_min", float(curve.v[0])),
        ("v_max", float(curve.v[-1])),
        ("j_min_ueV", float(curve.j.min())),
        ("j_max_ueV", float(curve.j.max())),
        ("voltage_swing_mV", float(curve.voltage_swing)),
        ("fingerprint", curve.fingerprint),
    ))]
    if np.all(curve.j > 0):
        fit = fit_exponential(curve.v, curve.j)
        sections.append(("exponential_fit", (
            ("rate", fit.rate),
            ("prefactor_ueV", fit.prefactor),
            ("r_squared", "none" if fit.r_squared is None else fit.r_squared),
            ("decay_scale",
             "none" if fit.decay_length is None else fit.decay_length),
        )))
    return sections


def _run_sweep(spec: RunSpec, out_dir: str, threads: int) -> list:
    curve = sweep_exchange(spec.layout, _sweep_grid(spec), spec.solver,
                           threads=threads)
    emit_plot_data(curve, out_dir)
    return _curve_sections(curve)


def _run_analyze(spec: RunSpec, out_dir: str, threads: int) -> list:
    curve = _refined_curve(spec, threads)
    emit_plot_data(curve, out_dir)
    v_star, j_star, curvature = find_flattop(curve)
    rep = report_at(curve, v_star, spec.analysis.delta)
    sections = _curve_sections(curve)
    sections.append(("flattop", (
        ("v_star", v_star),
        ("j_star_ueV", j_star),
        ("curvature", curvature),
        ("off_to_on_ratio", float(abs(curve.j[0]) / j_star)),
    )))
    sections.append(("error_budget", (
        ("delta", rep.delta),
        ("omega_pointwise", rep.omega_pointwise),
        ("rms_relative_error", rep.rms_relative_error),
        ("omega_effective", rep.omega_effective),
        ("fault_tolerant_1e-4", rep.fault_tolerant_1e4),
        ("fault_tolerant_1e-3", rep.fault_tolerant_1e3),
        ("swap_time_ns", rep.swap_time_ns),
    )))
    return sections


def _run_optimize(spec: RunSpec, out_dir: str, threads: int) -> list:
    if spec.layout_name is None:
        raise ConfigError(
            "command 'optimize' needs a built-in layout template so free "
            "parameters can be mapped to layout arguments"
        )
    template = BUILTIN_LAYOUTS[spec.layout_name]
    import inspect
    accepted = set(inspect.signature(template).parameters)
    for name, _, _ in spec.optimize.parameters:
        if name not in accepted:
            raise ConfigError(
                f"optimize parameter {name!r} is not an argument of "
                f"{spec.layout_name}; accepted: {sorted(accepted - {'material'})}"
            )
    problem = DesignProblem(
        parameters=spec.optimize.parameters,
        j_min=spec.optimize.j_min,
        budget=spec.optimize.budget,
        delta=spec.analysis.delta,
    )

    def evaluator(params):
        return evaluate_design(params, template, spec.optimize.j_min,
                               spec.solver, spec.analysis.delta)

    result = optimize_design(problem, evaluator)
    atomic_write(os.path.join(out_dir, "trace.csv"), result.trace_csv())
    entries = [("evaluations", len(result.trace)),
               ("termination", result.termination),
               ("best_omega_effective", result.best_omega_effective),
               ("best_j_star_ueV", result.best_j_star)]
    for name in sorted(result.best_parameters):
        entries.append((f"best_{name}", result.best_parameters[name]))
    return [("optimize", tuple(entries))]


def _run_export_potential(spec: RunSpec, out_dir: str, threads: int) -> list:
    grid = assemble_potential(spec.layout, ControlPoint(spec.analysis.control),
                              spec.solver.nx, spec.solver.ny)
    atomic_write(os.path.join(out_dir, "potential.txt"), grid.to_text())
    return [("potential", (
        ("control", spec.analysis.control),
        ("nx", grid.nx),
        ("ny", grid.ny),
        ("spacing_nm", grid.spacing),
        ("min_meV", float(grid.values.min())),
        ("max_meV", float(grid.values.max())),
    ))]


# ---------------------------------------------------------------------------
# Oracle validation suite


def _validation_checks():
    """Yield (name, measured, bound, passed) oracle rows."""
    from scipy.integrate import dblquad

    mat = MaterialParams()

    # 1. Analytic gate potential against direct quadrature of the
    #    pinned-surface Poisson kernel.
    gate = GateElement(-30.0, 10.0, -20.0, 40.0, -100.0, -100.0, "channel", "g")
    d = mat.dot_depth

    def kernel(yp, xp, x, y):
        r2 = (x - xp) ** 2 + (y - yp) ** 2
        return d / (2.0 * np.pi * (r2 + d * d) ** 1.5)

    worst = 0.0
    for (x, y) in ((0.0, 0.0), (25.0, -10.0), (-50.0, 30.0)):
        val, _ = dblquad(kernel, gate.x_min, gate.x_max,
                         gate.y_min, gate.y_max, args=(x, y),
                         epsabs=1e-12, epsrel=1e-12)
        # energy = -voltage * coverage, so -(-100) * integral = 100 * val
        exact = gate_potential(gate, -100.0, (x, y), d)
        worst = max(worst, abs(exact - 100.0 * val) / abs(exact))
    yield ("gate-potential-quadrature", worst, 1e-8, worst < 1e-8)

    # 2. Empty-box spectrum against the exact finite-difference eigenvalues.
    from .constants import HBAR2_OVER_2ME
    n = 24
    h = 4.0
    from .device import PotentialGrid
    box = PotentialGrid(nx=n, ny=n, spacing=h, origin=(0.0, 0.0),
                        values=np.zeros((n, n)))
    orb = lowest_eigenpairs(build_hamiltonian(box, mat), 4)
    t = HBAR2_OVER_2ME / mat.effective_mass

    def mode(p, q):
        s = lambda m: np.sin(m * np.pi / (2 * (n + 1))) ** 2
        return t * (4.0 / h ** 2) * (s(p) + s(q))

    exact = np.sort([mode(p, q) for p in (1, 2) for q in (1, 2)])
    err = float(np.abs(orb.energies - exact).max() / exact[0])
    yield ("box-spectrum", err, 1e-9, err < 1e-9)

    # 3. Merged harmonic well against hbar-omega (n + 1).
    hw = 3.0
    well = harmonic_well(hw, 161, 161, (-120.0, 120.0, -120.0, 120.0))
    orb = lowest_eigenpairs(build_hamiltonian(well, mat), 3)
    target = hw * np.array([1.0, 2.0, 2.0])
    err = float(np.abs(orb.energies / target - 1.0).max())
    yield ("harmonic-levels", err, 5e-3, err < 5e-3)

    # 4. CI against the untruncated two-electron solve on a coarse grid.
    # The grid is deliberately coarse so the product-space solve stays
    # small; both sides share the discretization, so the comparison is
    # meaningful and the coarseness warning is expected noise here.
    import warnings
    dwell = model_double_well(30.0, 6.0, 1.0, 20, 20,
                              (-45.0, 45.0, -45.0, 45.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        bf = brute_force_two_electron(dwell, mat, k=4)
        ci = exchange_splitting(dwell, mat, n_orbitals=8)
    rel = abs(ci.exchange_ueV - bf.exchange_ueV) / abs(bf.exchange_ueV)
    yield ("ci-vs-brute-force", rel, 0.05, rel < 0.05)

    # 5. Two-site evaluator against the closed form.
    worst = 0.0
    for t2, u2 in ((0.05, 2.0), (0.2, 1.0), (0.01, 5.0)):
        jc = two_site_exchange_closed_form(t2, u2)
        jn = two_site_exchange_numeric(t2, u2)
        worst = max(worst, abs(jn - jc) / jc)
    yield ("two-site-closed-form", worst, 1e-10, worst < 1e-10)

    # 6. Threshold margins.
    ok_strict, m_strict = fault_tolerance_margin(5e-4, FAULT_TOLERANCE_STRICT)
    ok_relaxed, m_relaxed = fault_tolerance_margin(5e-4, FAULT_TOLERANCE_RELAXED)
    good = (not ok_strict and m_strict == 5.0 and ok_relaxed and m_relaxed == 0.5)
    yield ("threshold-margins", m_strict, 5.0, good)

    # 7. Flat-top refinement on exact parabola samples.
    vs = np.linspace(0.5, 1.1, 13)
    js = 10.0 - 30.0 * (vs - 0.83) ** 2
    curve = ExchangeCurve(points=tuple(zip(vs, js)))
    v_star, j_star, _ = find_flattop(curve)
    err = abs(v_star - 0.83)
    yield ("flattop-parabola", err, 1e-8, err < 1e-8)


def _run_validate(spec: RunSpec, out_dir: str, threads: int):
    rows = list(_validation_checks())
    table = ["check,measured,bound,pass"]
    entries = []
    for name, measured, bound, passed in rows:
        table.append(f"{name},{measured:.17g},{bound:.17g},{int(passed)}")
        entries.append((name, "pass" if passed else
                        f"FAIL (measured {measured:.3g}, bound {bound:.3g})"))
    atomic_write(os.path.join(out_dir, "validation.csv"),
                 "\n".join(table) + "\n")
    all_passed = all(r[3] for r in rows)
    entries.append(("all_passed", all_passed))
    return [("validation", tuple(entries))], all_passed


def run(spec: RunSpec, out_dir: str | None = None, threads: int = 1) -> RunReport:
    """Execute one run spec and persist its outputs."""
    out = out_dir if out_dir is not None else spec.output
    os.makedirs(out, exist_ok=True)
    started = time.monotonic_ns()
    all_passed = True
    if spec.command == "sweep":
        sections = _run_sweep(spec, out, threads)
    elif spec.command == "analyze":
        sections = _run_analyze(spec, out, threads)
    elif spec.command == "optimize":
        sections = _run_optimize(spec, out, threads)
    elif spec.command == "export-potential":
        sections = _run_export_potential(spec, out, threads)
    elif spec.command == "validate":
        sections, all_passed = _run_validate(spec, out, threads)
    else:  # pragma: no cover - RunSpec already validates the command
        raise ConfigError(f"unknown command {spec.command!r}")
    report = RunReport(
        command=spec.command,
        fingerprint=spec_fingerprint(spec),
        sections=tuple((name, tuple(entries)) for name, entries in sections),
        wall_time_ns=time.monotonic_ns() - started,
        all_passed=all_passed,
    )
    atomic_write(os.path.join(out, "report.txt"), render_report(report))
    return report
