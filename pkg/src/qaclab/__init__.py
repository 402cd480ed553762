"""Desk-scale workbench for constant-depth quantum circuits built from product-state
reflections: statevector simulation, Boolean Fourier analysis, felinity, and
executable checks of gadget constructions."""

__version__ = "0.1.0"
