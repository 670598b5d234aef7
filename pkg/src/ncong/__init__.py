"""Twisted modular curves X_E(n) and n-congruent elliptic curves over Q.

Subpackages cover exact arithmetic, elliptic-curve invariants and point
counts, construction of the twisted models for n in {7, 9, 11}, classical
covariants, model minimisation/reduction, rational point search, modular
interpretation of points, and trace-of-Frobenius congruence certification.
"""

__version__ = "0.1.0"
