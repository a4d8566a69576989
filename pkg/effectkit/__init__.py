"""
effectkit - finite-dimensional numerical toolkit for quantum effect algebra.

Effects, observables, Naimark dilations, complementarity verdicts, joint
measurability oracles and the lattice/oscillator model generators built on them.
"""

__version__ = "1.0.0"
