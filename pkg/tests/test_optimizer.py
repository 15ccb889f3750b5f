"""Design optimizer: simplex search on synthetic objectives, invariants."""

import numpy as np
import pytest

from exchangesim.errors import ConfigError, InfeasibleError
from exchangesim.optimizer import (
    DesignProblem,
    Evaluation,
    incumbent_history,
    optimize_design,
)


def quadratic_evaluator(target):
    """Synthetic smooth objective with a feasible minimum at ``target``."""
    def evaluate(params):
        x = np.array([params[k] for k in sorted(params)])
        t = np.array([target[k] for k in sorted(target)])
        value = float(np.sum((x - t) ** 2))
        return Evaluation(parameters=dict(params), omega_effective=value,
                          j_star=5.0, feasible=True)
    return evaluate


class TestDesignProblem:
    def test_validation(self):
        with pytest.raises(ConfigError):
            DesignProblem(parameters=(), j_min=1.0, budget=10)
        with pytest.raises(ConfigError):
            DesignProblem(parameters=(("a", 1.0, 0.0),), j_min=1.0, budget=10)
        with pytest.raises(ConfigError):
            DesignProblem(parameters=(("a", 0.0, 1.0),), j_min=-1.0, budget=10)
        with pytest.raises(ConfigError):
            DesignProblem(parameters=(("a", 0.0, 1.0), ("b", 0.0, 1.0)),
                          j_min=1.0, budget=3)
        with pytest.raises(ConfigError):
            DesignProblem(parameters=(("a", 0.0, 1.0), ("a", 0.0, 2.0)),
                          j_min=1.0, budget=10)


class TestSimplexSearch:
    def test_1d_quadratic_located(self):
        problem = DesignProblem(parameters=(("x", -2.0, 2.0),),
                                j_min=1.0, budget=60)
        result = optimize_design(problem, quadratic_evaluator({"x": 0.7}))
        assert result.best_parameters["x"] == pytest.approx(0.7, abs=4e-3)
        assert result.termination == "converged"

    def test_2d_quadratic_located(self):
        problem = DesignProblem(
            parameters=(("x", -1.0, 1.0), ("y", 0.0, 4.0)),
            j_min=1.0, budget=120)
        result = optimize_design(problem,
                                 quadratic_evaluator({"x": 0.25, "y": 3.0}))
        assert result.best_parameters["x"] == pytest.approx(0.25, abs=1e-2)
        assert result.best_parameters["y"] == pytest.approx(3.0, abs=2e-2)

    def test_budget_exhaustion(self):
        problem = DesignProblem(parameters=(("x", -2.0, 2.0),),
                                j_min=1.0, budget=5)
        result = optimize_design(problem, quadratic_evaluator({"x": 0.7}))
        assert result.termination == "budget"
        assert len(result.trace) <= 5

    def test_first_evaluation_at_midpoint(self):
        problem = DesignProblem(parameters=(("x", -3.0, 5.0),),
                                j_min=1.0, budget=10)
        result = optimize_design(problem, quadratic_evaluator({"x": 0.0}))
        assert result.trace[0].parameters["x"] == pytest.approx(1.0)

    def test_determinism(self):
        problem = DesignProblem(parameters=(("x", -2.0, 2.0), ("y", -2.0, 2.0)),
                                j_min=1.0, budget=40)
        ev = quadratic_evaluator({"x": -0.4, "y": 1.1})
        a = optimize_design(problem, ev)
        b = optimize_design(problem, ev)
        assert a == b

    def test_candidates_respect_bounds(self):
        seen = []

        def evaluate(params):
            seen.append(params["x"])
            return Evaluation(parameters=dict(params),
                              omega_effective=(params["x"] + 5.0) ** 2,
                              j_star=5.0, feasible=True)

        problem = DesignProblem(parameters=(("x", -1.0, 1.0),),
                                j_min=1.0, budget=30)
        optimize_design(problem, evaluate)  # pushes toward the lower bound
        assert all(-1.0 <= x <= 1.0 for x in seen)


class TestConstraints:
    def test_infeasible_region_avoided(self):
        """Minimum of the raw objective is infeasible; the optimizer must
        settle for the best feasible point instead."""
        def evaluate(params):
            x = params["x"]
            return Evaluation(parameters=dict(params),
                              omega_effective=x ** 2,
                              j_star=3.0 if x >= 0.5 else 0.1,
                              feasible=x >= 0.5)

        problem = DesignProblem(parameters=(("x", -2.0, 2.0),),
                                j_min=1.0, budget=60)
        result = optimize_design(problem, evaluate)
        assert result.best_parameters["x"] == pytest.approx(0.5, abs=5e-3)
        assert result.best_omega_effective >= 0.25 - 1e-6

    def test_all_infeasible_raises_with_trace(self):
        def evaluate(params):
            return Evaluation(parameters=dict(params), omega_effective=1.0,
                              j_star=0.0, feasible=False)

        problem = DesignProblem(parameters=(("x", 0.0, 1.0),),
                                j_min=1.0, budget=6)
        with pytest.raises(InfeasibleError) as info:
            optimize_design(problem, evaluate)
        assert len(info.value.trace) == 6


class TestTraceInvariants:
    def test_incumbent_monotone(self):
        problem = DesignProblem(parameters=(("x", -2.0, 2.0),),
                                j_min=1.0, budget=40)
        result = optimize_design(problem, quadratic_evaluator({"x": 1.3}))
        history = incumbent_history(result)
        assert all(b <= a + 1e-15 for a, b in zip(history, history[1:]))
        assert history[-1] == result.best_omega_effective

    def test_best_entry_is_minimal_feasible(self):
        problem = DesignProblem(parameters=(("x", -2.0, 2.0),),
                                j_min=1.0, budget=25)
        result = optimize_design(problem, quadratic_evaluator({"x": -0.9}))
        feasible = [ev for ev in result.trace if ev.feasible]
        assert result.best_omega_effective == min(
            ev.omega_effective for ev in feasible)
        assert result.best_j_star >= problem.j_min

    def test_trace_csv_layout(self):
        problem = DesignProblem(parameters=(("bias", -2.0, 2.0),),
                                j_min=1.0, budget=8)
        result = optimize_design(problem, quadratic_evaluator({"bias": 0.0}))
        lines = result.trace_csv().strip().splitlines()
        assert lines[0] == "eval,param_bias,omega_eff,J_star_ueV,feasible"
        assert len(lines) == 1 + len(result.trace)
        first = lines[1].split(",")
        assert first[0] == "0" and first[4] in ("0", "1")
