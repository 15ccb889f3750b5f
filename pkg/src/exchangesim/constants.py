"""Physical constants in the internal unit system (nm, meV, mV, ns).

With these units an electron sitting at electrostatic potential phi [mV]
has potential energy -phi [meV], so voltages and energies convert with a
bare sign flip.
"""

# hbar^2 / (2 m_e) for the free electron mass, in meV nm^2.
# Divide by the effective mass ratio to get the kinetic prefactor.
HBAR2_OVER_2ME = 38.0998

# Coulomb constant e^2 / (4 pi eps_0) in meV nm (vacuum).
COULOMB_CONSTANT = 1439.96454

# Planck constant in ueV ns (4.135667e-15 eV s).
PLANCK_UEV_NS = 4.135667e3 * 1e-3  # = 4.135667 ueV ns
