"""Built-in reference devices.

``channel_reference`` is the bistable sliding-electron design: two vertical
channels separated by a thin center rail.  Each channel holds one electron.
Fixed positive "pocket" gates mark the mid-channel landing sites; opposing
plunger pairs at the channel ends pull the electrons apart at v = 0 (left
electron up, right electron down, coupling exponentially small) and release
them into the pockets as v -> 1 (side by side, coupling on).  Because the
pockets pin the electrons against small plunger imbalance, J(v) is flat at
the top and the peak susceptibility is orders of magnitude below a swept
barrier.

``barrier_reference`` is the conventional geometry: two dots in a horizontal
slot separated by a central barrier gate whose voltage is swept, giving the
familiar exponential J(v).

Voltage magnitudes are empirical choices that realize bistability with the
default material stack; they are not literature values.
"""

from __future__ import annotations

from .device import DeviceLayout, GateElement, MaterialParams

DEFAULT_MATERIAL = MaterialParams()

# Lithographic floor used throughout the reference layouts, nm.
MIN_FEATURE = 30.0

CHANNEL_DOMAIN = (-130.0, 130.0, -130.0, 130.0)
BARRIER_DOMAIN = (-120.0, 120.0, -120.0, 120.0)

# Grid sizes giving 2.5 nm cells on the two domains.
CHANNEL_GRID = 105
BARRIER_GRID = 97

# Orbitals per electron for converged reference sweeps.  Eight orbitals
# suffice near the operating points but leave visible truncation error in
# the weakly coupled transition region; twelve keep every sweep point
# within the singlet-ground tolerance.
REFERENCE_ORBITALS = 12


def channel_reference(center_voltage: float = -120.0,
                      pocket_voltage: float = 60.0,
                      rail_voltage: float = -300.0,
                      cap_voltage: float = -80.0,
                      attract_voltage: float = 200.0,
                      repel_voltage: float = -350.0,
                      on_voltage: float = -30.0,
                      material: MaterialParams = DEFAULT_MATERIAL) -> DeviceLayout:
    """Bistable channel device with 30 nm minimum features.

    The four plungers share one "on" voltage, so at v = 1 the layout is
    invariant under 180-degree rotation and the two dots are degenerate by
    symmetry.  At v = 0 each channel sees a strong attract/repel pair that
    parks its electron at one end; the pairing is rotation-symmetric, so
    the left electron parks high while the right parks low.
    """
    gates = [
        # Channel-defining rails (fixed).  Footprints extend past the
        # domain so the walls stay uniform up to the boundary.
        GateElement(-200, -75, -200, 200, rail_voltage, rail_voltage,
                    "channel", "rail-left"),
        GateElement(-15, 15, -200, 200, center_voltage, center_voltage,
                    "channel", "rail-center"),
        GateElement(75, 200, -200, 200, rail_voltage, rail_voltage,
                    "channel", "rail-right"),
        # Full-width end strips closing both channels (fixed).
        GateElement(-200, 200, 130, 200, cap_voltage, cap_voltage,
                    "channel", "cap-top"),
        GateElement(-200, 200, -200, -130, cap_voltage, cap_voltage,
                    "channel", "cap-bottom"),
        # Mid-channel landing pockets (fixed, attractive).  These stiffen
        # the on-state position against plunger imbalance, which is what
        # flattens the top of J(v).
        GateElement(-75, -15, -25, 25, pocket_voltage, pocket_voltage,
                    "channel", "pocket-left"),
        GateElement(15, 75, -25, 25, pocket_voltage, pocket_voltage,
                    "channel", "pocket-right"),
        # Opposing plunger pairs (swept).
        GateElement(-75, -15, 60, 110, attract_voltage, on_voltage,
                    "plunger", "plunger-left-top"),
        GateElement(-75, -15, -110, -60, repel_voltage, on_voltage,
                    "plunger", "plunger-left-bottom"),
        GateElement(15, 75, 60, 110, repel_voltage, on_voltage,
                    "plunger", "plunger-right-top"),
        GateElement(15, 75, -110, -60, attract_voltage, on_voltage,
                    "plunger", "plunger-right-bottom"),
    ]
    return DeviceLayout(gates=tuple(gates), material=material,
                        domain=CHANNEL_DOMAIN)


def barrier_reference(rail_voltage: float = -300.0,
                      barrier_off: float = -195.0,
                      barrier_on: float = -60.0,
                      material: MaterialParams = DEFAULT_MATERIAL) -> DeviceLayout:
    """Conventional barrier-gated double dot.

    The swept control is the central barrier electrode (declared a plunger
    because it is the gate the control voltage drives); v = 0 leaves a high
    barrier, v = 1 a low one, and J rises exponentially in between.
    """
    gates = [
        GateElement(-160, 160, 30, 160, rail_voltage, rail_voltage,
                    "channel", "rail-top"),
        GateElement(-160, 160, -160, -30, rail_voltage, rail_voltage,
                    "channel", "rail-bottom"),
        GateElement(-160, -75, -30, 30, rail_voltage, rail_voltage,
                    "channel", "cap-left"),
        GateElement(75, 160, -30, 30, rail_voltage, rail_voltage,
                    "channel", "cap-right"),
        GateElement(-15, 15, -30, 30, barrier_off, barrier_on,
                    "plunger", "barrier-center"),
    ]
    return DeviceLayout(gates=tuple(gates), material=material,
                        domain=BARRIER_DOMAIN)


BUILTIN_LAYOUTS = {
    "channel-reference": channel_reference,
    "barrier-reference": barrier_reference,
}

# (nx, ny) reference grid per built-in, chosen for square 2.5 nm cells.
BUILTIN_GRIDS = {
    "channel-reference": (CHANNEL_GRID, CHANNEL_GRID),
    "barrier-reference": (BARRIER_GRID, BARRIER_GRID),
}


def builtin_layout(name: str) -> DeviceLayout:
    try:
        return BUILTIN_LAYOUTS[name]()
    except KeyError:
        raise KeyError(
            f"unknown built-in layout {name!r}; "
            f"available: {sorted(BUILTIN_LAYOUTS)}"
        ) from None
