"""
Searching the design space
==========================

The flat top is a property of the layout, not a lucky operating point, so
it can be optimized.  ``optimize_design`` runs a deterministic Nelder-Mead
simplex over named layout parameters, scoring each candidate by its
effective susceptibility Omega_eff at the flat top and rejecting designs
whose peak coupling falls below a floor (here 1 ueV) or that have no flat
top at all.

This demo frees the center-rail voltage of the channel-reference device
and lets the search trade rail height against flatness.  Each evaluation
is a full J(v) sweep, so the budget is kept small; expect a couple of
minutes.

Run:  python3 demos/04_design_search.py
"""

import os

from exchangesim.analysis import SolverSettings
from exchangesim.optimizer import (
    DesignProblem,
    evaluate_design,
    incumbent_history,
    optimize_design,
)
from exchangesim.reference import channel_reference

settings = SolverSettings(nx=65, ny=65, n_orbitals=12)

problem = DesignProblem(
    parameters=(("center_voltage", -160.0, -80.0),),
    j_min=1.0,      # ueV: reject designs with a weak on-state
    budget=25,
)


def evaluator(params):
    return evaluate_design(params, channel_reference, problem.j_min,
                           settings, problem.delta)


print("free parameter: center_voltage in [-160, -80] mV "
      "(hand-tuned reference: -120 mV)")
print(f"budget: {problem.budget} design evaluations\n")

result = optimize_design(problem, evaluator)

print("eval  center_voltage   omega_eff   J* (ueV)  feasible")
for i, ev in enumerate(result.trace):
    omega = (f"{ev.omega_effective:9.4f}"
             if ev.omega_effective == ev.omega_effective else "      n/a")
    print(f"{i:4d}  {ev.parameters['center_voltage']:14.2f}   {omega}   "
          f"{ev.j_star:8.3f}  {'yes' if ev.feasible else 'no'}")

print()
print(f"termination: {result.termination}")
print(f"best design: center_voltage = "
      f"{result.best_parameters['center_voltage']:.2f} mV")
print(f"  omega_eff = {result.best_omega_effective:.4f}, "
      f"J* = {result.best_j_star:.3f} ueV")

history = incumbent_history(result)
print(f"incumbent improved {sum(1 for a, b in zip(history, history[1:]) if b < a)}"
      f" times: {history[0]:.4f} -> {history[-1]:.4f}")
