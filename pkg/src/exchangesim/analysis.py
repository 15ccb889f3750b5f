"""Exchange-curve analysis: sweeps, susceptibility, error budget, flat-top.

The control-error figure of merit is the dimensionless susceptibility
Omega = |(V/J) dJ/dV|, which converts a fractional voltage error into a
fractional coupling error.  V is referenced to the physical plunger swing,
which is proportional to the normalized control v, so log-derivatives in v
and in V coincide.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .constants import PLANCK_UEV_NS
from .device import ControlPoint, DeviceLayout, assemble_potential
from .errors import SimulationError
from .twoelectron import exchange_splitting

J_NEGATIVE_TOL = 1e-4  # ueV of numerical slack on the singlet-ground bound

FAULT_TOLERANCE_STRICT = 1e-4
FAULT_TOLERANCE_RELAXED = 1e-3


class AnalysisError(SimulationError):
    """Analysis request outside the curve's domain of validity."""


class NoFlattopError(AnalysisError):
    """The curve has no interior maximum (conventional monotone response)."""


class SweepError(SimulationError):
    """One or more sweep points failed; carries the completed partial curve."""

    exit_code = 3

    def __init__(self, message, failed_points, partial_points):
        super().__init__(message)
        self.failed_points = failed_points
        self.partial_points = partial_points


@dataclass(frozen=True)
class SolverSettings:
    """Grid and basis-set settings for one exchange evaluation."""

    nx: int = 97
    ny: int = 97
    n_orbitals: int = 8
    eig_tol: float = 1e-10
    hf_refine: bool = False
    hf_mix: float = 0.5
    interaction_scale: float = 1.0


@dataclass(frozen=True)
class ExchangeCurve:
    """Tabulated exchange coupling J(v), J in ueV, v strictly increasing."""

    points: tuple[tuple[float, float], ...]
    fingerprint: str = ""
    voltage_swing: float = 1.0  # mV per unit v, for reporting physical V

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(map(tuple, self.points)))
        if len(self.points) < 5:
            raise AnalysisError("an exchange curve needs at least 5 points")
        vs = np.array([p[0] for p in self.points])
        js = np.array([p[1] for p in self.points])
        if np.any(np.diff(vs) <= 0):
            raise AnalysisError("curve v values must be strictly increasing")
        if not np.all(np.isfinite(js)):
            raise AnalysisError("curve contains non-finite J values")
        if np.any(js < -J_NEGATIVE_TOL):
            raise AnalysisError(
                f"curve violates the singlet-ground bound: min J = {js.min():.3g} ueV"
            )

    @property
    def v(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def j(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def to_csv(self) -> str:
        lines = ["v,J_ueV"]
        for v, j in self.points:
            lines.append(f"{v:.17g},{j:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SusceptibilityReport:
    """Gate-error budget at one operating point."""

    v0: float
    j0_ueV: float
    omega_pointwise: float
    delta: float
    rms_relative_error: float
    omega_effective: float
    fault_tolerant_1e4: bool
    fault_tolerant_1e3: bool
    swap_time_ns: float


def layout_fingerprint(layout: DeviceLayout, settings: SolverSettings) -> str:
    m = hashlib.sha256()
    m.update(repr(layout).encode())
    m.update(repr(settings).encode())
    return m.hexdigest()


def sweep_exchange(layout: DeviceLayout, v_values,
                   settings: SolverSettings = SolverSettings(),
                   threads: int = 1) -> ExchangeCurve:
    """Evaluate J at each control point; points are mutually independent.

    With ``threads > 1`` the points are evaluated concurrently; results are
    collected in sweep order, so the curve is identical either way.
    """
    v_values = list(v_values)
    if np.any(np.diff(v_values) <= 0):
        raise AnalysisError("v_values must be strictly increasing")

    def solve(v):
        grid = assemble_potential(layout, ControlPoint(v),
                                  settings.nx, settings.ny)
        spectrum = exchange_splitting(
            grid, layout.material, n_orbitals=settings.n_orbitals,
            eig_tol=settings.eig_tol, hf_refine=settings.hf_refine,
            hf_mix=settings.hf_mix,
            interaction_scale=settings.interaction_scale,
        )
        return spectrum.exchange_ueV

    points = []
    failures = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [(v, pool.submit(solve, v)) for v in v_values]
        outcomes = []
        for v, fut in futures:
            try:
                outcomes.append((v, fut.result(), None))
            except SimulationError as exc:
                outcomes.append((v, None, str(exc)))
    else:
        outcomes = []
        for v in v_values:
            try:
                outcomes.append((v, solve(v), None))
            except SimulationError as exc:
                outcomes.append((v, None, str(exc)))
    for v, j, err in outcomes:
        if err is None:
            points.append((v, j))
        else:
            failures.append((v, err))
    if failures:
        raise SweepError(
            f"{len(failures)} sweep point(s) failed: "
            + "; ".join(f"v={v:g}: {msg}" for v, msg in failures),
            failed_points=failures, partial_points=points,
        )
    return ExchangeCurve(
        points=tuple(points),
        fingerprint=layout_fingerprint(layout, settings),
        voltage_swing=layout.plunger_swing(),
    )


def _local_fit(curve: ExchangeCurve, v0: float, n_points: int,
               degree: int) -> np.ndarray:
    """Polynomial fit (coefficients, highest power first) through the
    ``n_points`` curve samples nearest to v0, in the shifted variable v - v0."""
    vs, js = curve.v, curve.j
    n_points = min(n_points, len(vs))
    idx = np.argsort(np.abs(vs - v0), kind="stable")[:n_points]
    idx = np.sort(idx)
    degree = min(degree, n_points - 1)
    return np.polyfit(vs[idx] - v0, js[idx], degree)


def interpolate_j(curve: ExchangeCurve, v0: float) -> float:
    """Local cubic interpolation of J through the 4 nearest samples."""
    vs = curve.v
    if not (vs[0] <= v0 <= vs[-1]):
        raise AnalysisError(f"v={v0:g} outside curve domain [{vs[0]:g}, {vs[-1]:g}]")
    coeffs = _local_fit(curve, v0, 4, 3)
    return float(np.polyval(coeffs, 0.0))


def signed_susceptibility(curve: ExchangeCurve, v0: float) -> float:
    """(v/J) dJ/dv with sign, from a local quadratic through the 5 nearest
    samples.  Negative past a peak; requires v0 interior and J(v0) > 0."""
    vs = curve.v
    if not (vs[0] < v0 < vs[-1]):
        raise AnalysisError(f"v={v0:g} is not interior to the curve domain")
    coeffs = _local_fit(curve, v0, 5, 2)
    j0 = float(np.polyval(coeffs, 0.0))
    if j0 <= 0:
        raise AnalysisError(f"susceptibility undefined: J({v0:g}) = {j0:.3g} <= 0")
    dj = float(np.polyval(np.polyder(coeffs), 0.0))
    return v0 * dj / j0


def susceptibility(curve: ExchangeCurve, v0: float) -> float:
    """Pointwise Omega = |(v/J) dJ/dv|; see ``signed_susceptibility``."""
    return abs(signed_susceptibility(curve, v0))


def rms_coupling_error(curve: ExchangeCurve, v0: float, delta: float,
                       n_nodes: int = 41) -> float:
    """RMS deviation of J from its mean over a uniform voltage window.

    The window is +- delta (fractional) around the operating voltage; since
    physical voltage is proportional to v, the window maps to
    [v0 (1 - delta), v0 (1 + delta)].  Integrals use composite Simpson
    quadrature on the locally interpolated curve.
    """
    if delta == 0.0:
        return 0.0
    if delta < 0:
        raise AnalysisError("delta must be >= 0")
    lo, hi = v0 * (1.0 - delta), v0 * (1.0 + delta)
    vs = curve.v
    if lo < vs[0] or hi > vs[-1]:
        raise AnalysisError(
            f"voltage window [{lo:g}, {hi:g}] exits curve domain "
            f"[{vs[0]:g}, {vs[-1]:g}]"
        )
    n_nodes = max(n_nodes, 21)
    if n_nodes % 2 == 0:
        n_nodes += 1
    u = np.linspace(lo, hi, n_nodes)
    j = np.array([interpolate_j(curve, ui) for ui in u])
    width = hi - lo
    mean = simpson(j, x=u) / width
    var = simpson((j - mean) ** 2, x=u) / width
    if mean <= 0:
        raise AnalysisError("mean J non-positive over the voltage window")
    return float(np.sqrt(max(var, 0.0)) / mean)


def fault_tolerance_margin(rms_relative_error: float,
                           threshold: float) -> tuple[bool, float]:
    """(pass, margin): margin is the error in units of the threshold."""
    if threshold <= 0:
        raise AnalysisError("threshold must be > 0")
    margin = rms_relative_error / threshold
    return rms_relative_error < threshold, margin


def find_flattop(curve: ExchangeCurve) -> tuple[float, float, float]:
    """Locate the interior maximum of J(v) by quadratic refinement.

    Returns (v_star, J_star, curvature) with the dimensionless curvature a
    defined by J(v) ~ J* (1 - a ((v - v*)/v*)^2) near the peak.  Raises
    NoFlattopError when the maximum sits at an endpoint.
    """
    vs, js = curve.v, curve.j
    imax = int(np.argmax(js))
    if imax == 0 or imax == len(vs) - 1:
        raise NoFlattopError(
            "maximum J occurs at a sweep endpoint; the response is monotone"
        )
    sel = slice(imax - 1, imax + 2)
    c2, c1, c0 = np.polyfit(vs[sel], js[sel], 2)
    if c2 >= 0:
        raise NoFlattopError("no concave interior maximum found")
    v_star = -c1 / (2.0 * c2)
    j_star = float(np.polyval([c2, c1, c0], v_star))
    curvature = float(-c2 * v_star ** 2 / j_star)
    return float(v_star), j_star, curvature


def swap_time(j_ueV: float) -> float:
    """SWAP gate time tau = h / (2 J), in ns for J in ueV."""
    if j_ueV <= 0:
        raise AnalysisError("swap time undefined for J <= 0")
    return PLANCK_UEV_NS / (2.0 * j_ueV)


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares fit of log J against the abscissa."""

    rate: float            # d log J / d x
    prefactor: float       # J extrapolated to x = 0
    r_squared: float | None
    decay_length: float | None  # 1/|rate|, None for a flat curve


def fit_exponential(xs, js) -> ExponentialFit:
    """Fit J = prefactor * exp(rate * x) by linear regression on log J."""
    xs = np.asarray(xs, dtype=float)
    js = np.asarray(js, dtype=float)
    if len(xs) < 3:
        raise AnalysisError("exponential fit needs at least 3 points")
    if np.any(js <= 0):
        raise AnalysisError("exponential fit requires all J > 0")
    y = np.log(js)
    rate, intercept = np.polyfit(xs, y, 1)
    resid = y - (rate * xs + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return ExponentialFit(rate=0.0, prefactor=float(np.exp(intercept)),
                              r_squared=None, decay_length=None)
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    decay = 1.0 / abs(rate) if abs(rate) > 1e-300 else None
    return ExponentialFit(rate=float(rate), prefactor=float(np.exp(intercept)),
                          r_squared=r2, decay_length=decay)


def report_at(curve: ExchangeCurve, v0: float,
              delta: float = 0.01) -> SusceptibilityReport:
    """Full error-budget report at one operating point."""
    j0 = interpolate_j(curve, v0)
    omega = susceptibility(curve, v0)
    rms = rms_coupling_error(curve, v0, delta)
    omega_eff = rms / delta if delta > 0 else 0.0
    ok4, _ = fault_tolerance_margin(rms, FAULT_TOLERANCE_STRICT)
    ok3, _ = fault_tolerance_margin(rms, FAULT_TOLERANCE_RELAXED)
    return SusceptibilityReport(
        v0=v0, j0_ueV=j0, omega_pointwise=omega, delta=delta,
        rms_relative_error=rms, omega_effective=omega_eff,
        fault_tolerant_1e4=ok4, fault_tolerant_1e3=ok3,
        swap_time_ns=swap_time(j0),
    )
