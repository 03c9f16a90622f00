"""Symbolic K- and L-theory of group rings for a catalog of groups.

Closed-form decompositions are expanded into formal direct sums of atoms
(``K_n(R)``, ``NK_n(R)``, ``L_n^e(R)``, Whitehead and structure groups,
``UNil``), simplified under ring axioms, and cross-checked against
brute-force oracles wherever the inputs are computable.
"""

__version__ = "0.1.0"
