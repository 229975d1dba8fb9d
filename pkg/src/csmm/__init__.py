"""Exact computational toolkit for the flavored Chern-Simons matrix model algebra.

Modules:

- ``exact``: rational scalars, half-integer power ledger, parameter polynomials, exact linear algebra
- ``fock`` / ``diagrams``: the oscillator Fock engine and the trace-diagram engine for physical states
- ``observables``: gauge-invariant operators, relation families and their verification
- ``symfun``: partitions, Murnaghan-Nakayama rule, chain-label and Schur dictionaries
- ``hilbert``: the trace basis, exact representation matrices and large-N checks at p = 1
- ``ddca``: the abstract large-N algebra, PBW normal forms and the scaling-limit Lie algebra
- ``moments``: ground-state moments, Catalan limits and the filling factor
- ``cli``: the ``csmm`` command-line front end
"""
from __future__ import annotations

from .exact import ParamPoly, ScaledRational
from .fock import ModelParams

__all__ = ["ModelParams", "ParamPoly", "ScaledRational"]
__version__ = "0.1.0"
