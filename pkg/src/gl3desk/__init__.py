"""Desk-scale numerical verification of delta-method / GL(3) machinery.

Subpackages follow the pipeline bottom-up: exact modular arithmetic
(``arith``), Dirichlet characters and Gauss sums (``characters``), complete
exponential sums with brute-force oracles (``expsums``), archimedean gamma
factors (``special``), oscillatory integrals and stationary phase
(``oscillatory``), GL(3) coefficient oracles and Voronoi summation (``gl3``),
and the smoothed-sum pipeline with its identity checks and exponent scans
(``pipeline``).  The ``cli`` module exposes every harness as a subcommand.
"""

__version__ = "0.1.0"
