"""Cavity MS, Mølmer–Sørensen gates in cavity QED.

Two qubits share a single cavity mode through cavity-assisted Raman
transitions. Eliminating the far-detuned excited levels leaves a spin-dependent
force on the photon mode that closes a loop in phase space and imprints a
geometric phase proportional to S_x², the Mølmer–Sørensen gate.

common/ : constants, exceptions, model shim and utilities
lib/    : operator algebra, Hamiltonians, dynamics, fidelities and scenarios
cli/    : the `cavityms` command line tool

"""

__version__ = "0.1.0"
