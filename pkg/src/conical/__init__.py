"""Arithmetic of conical curves over Q: local solubility, Brauer groups via
local invariants, incidence graphs, and the Hasse-principle counterexamples
built from them."""

__version__ = "0.1.0"
