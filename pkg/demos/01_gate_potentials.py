"""
Gate-defined confinement potentials
===================================

Every simulation starts from a lithographic gate layout: rectangular
electrodes above a two-dimensional electron gas.  Each gate at voltage V
contributes an analytic "pinned surface" potential at the electron plane a
depth d below, proportional to the solid-angle coverage of its rectangle.

This script renders the two built-in reference devices at several control
voltages and shows the mechanism behind each one:

* barrier-reference: two dots in a slot; sweeping the central barrier gate
  from -195 mV to -60 mV thins the tunnel barrier, so the exchange
  coupling rises exponentially.
* channel-reference: two vertical channels; at v = 0 opposing plungers
  park the electrons at opposite channel ends, and as v -> 1 fixed
  attractive "pocket" gates capture them side by side at mid-channel.
  The pockets pin the on-state positions, which is what will make J(v)
  flat at the top in the next demo.

Run:  python3 demos/01_gate_potentials.py
Writes PNG figures into demos/output/.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from exchangesim.device import ControlPoint, assemble_potential
from exchangesim.reference import barrier_reference, channel_reference

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# ---------------------------------------------------------------------------
# Barrier device: the potential along y = 0 shows the tunnel barrier melting
# as the control voltage rises.

layout = barrier_reference()
fig, axes = plt.subplots(1, 2, figsize=(11, 4))

for v in (0.0, 0.5, 1.0):
    grid = assemble_potential(layout, ControlPoint(v), 97, 97)
    mid = grid.ny // 2
    x = grid.origin[0] + grid.spacing * np.arange(grid.nx)
    axes[0].plot(x, grid.values[:, mid], label=f"v = {v:.1f}")
axes[0].set_xlabel("x (nm)")
axes[0].set_ylabel("potential (meV)")
axes[0].set_title("barrier-reference: cut along y = 0")
axes[0].legend()

grid = assemble_potential(layout, ControlPoint(1.0), 97, 97)
im = axes[1].imshow(grid.values.T, origin="lower", extent=(-120, 120, -120, 120))
axes[1].set_title("barrier-reference at v = 1")
axes[1].set_xlabel("x (nm)")
axes[1].set_ylabel("y (nm)")
fig.colorbar(im, ax=axes[1], label="meV")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "barrier_potential.png"), dpi=120)
print("wrote", os.path.join(OUT, "barrier_potential.png"))

# ---------------------------------------------------------------------------
# Channel device: track the potential minimum inside each channel.  At v = 0
# the two minima sit at opposite ends (large separation, J off); by v = 1
# both sit in the mid-channel pockets (side by side, J on).

layout = channel_reference()
fig, axes = plt.subplots(1, 3, figsize=(14, 4.2))
for ax, v in zip(axes, (0.0, 0.5, 1.0)):
    grid = assemble_potential(layout, ControlPoint(v), 105, 105)
    ax.imshow(grid.values.T, origin="lower", extent=(-130, 130, -130, 130))
    ax.set_title(f"channel-reference, v = {v:.1f}")
    ax.set_xlabel("x (nm)")
    x = grid.origin[0] + grid.spacing * np.arange(grid.nx)
    y = grid.origin[1] + grid.spacing * np.arange(grid.ny)
    for sel in (x < 0, x > 0):  # left and right channel separately
        vals = grid.values[sel, :]
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        ax.plot(x[sel][i], y[j], "r+", markersize=14, markeredgewidth=2)
axes[0].set_ylabel("y (nm)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "channel_potential.png"), dpi=120)
print("wrote", os.path.join(OUT, "channel_potential.png"))

print()
print("electron landing sites (potential minima, nm):")
for v in (0.0, 0.25, 0.5, 0.75, 1.0):
    grid = assemble_potential(layout, ControlPoint(v), 105, 105)
    x = grid.origin[0] + grid.spacing * np.arange(grid.nx)
    y = grid.origin[1] + grid.spacing * np.arange(grid.ny)
    spots = []
    for sel in (x < 0, x > 0):
        vals = grid.values[sel, :]
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        spots.append((float(x[sel][i]), float(y[j])))
    (lx, ly), (rx, ry) = spots
    print(f"  v = {v:4.2f}: left ({lx:6.1f}, {ly:6.1f})   "
          f"right ({rx:6.1f}, {ry:6.1f})")
