"""exchangesim: exchange-coupling simulator for gate-defined double dots.

Computes the two-electron exchange splitting J(v) of a planar device as a
function of a normalized control voltage, and analyzes the gate-error
susceptibility of the resulting coupling curve.  Ships two built-in
reference devices: a conventional barrier-gated pair (exponential J) and a
bistable channel design (flat-topped J).
"""

__version__ = "0.1.0"

from .analysis import (
    AnalysisError,
    ExchangeCurve,
    NoFlattopError,
    SolverSettings,
    SusceptibilityReport,
    SweepError,
    fault_tolerance_margin,
    find_flattop,
    fit_exponential,
    interpolate_j,
    report_at,
    rms_coupling_error,
    signed_susceptibility,
    susceptibility,
    swap_time,
    sweep_exchange,
)
from .config import (
    AnalysisSettings,
    OptimizeSettings,
    RunSpec,
    parse_config,
    serialize,
)
from .constants import COULOMB_CONSTANT, HBAR2_OVER_2ME, PLANCK_UEV_NS
from .device import (
    ControlPoint,
    DeviceLayout,
    GateElement,
    MaterialParams,
    PotentialGrid,
    assemble_potential,
    gate_potential,
    grid_from_text,
    harmonic_well,
    interpolate_controls,
    model_double_well,
)
from .eigensolver import (
    DiscretizedHamiltonian,
    OrbitalSet,
    build_hamiltonian,
    check_orthonormality,
    lowest_eigenpairs,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    InfeasibleError,
    ResourceError,
    SimulationError,
)
from .optimizer import (
    DesignProblem,
    DesignResult,
    Evaluation,
    evaluate_design,
    incumbent_history,
    optimize_design,
)
from .reference import (
    BUILTIN_LAYOUTS,
    barrier_reference,
    builtin_layout,
    channel_reference,
)
from .runner import RunReport, emit_plot_data, render_report, run
from .twoelectron import (
    TwoElectronSpectrum,
    brute_force_two_electron,
    coulomb_element,
    coulomb_tensor,
    exchange_splitting,
    hartree_fock_refine,
    two_site_exchange_closed_form,
    two_site_exchange_numeric,
)
