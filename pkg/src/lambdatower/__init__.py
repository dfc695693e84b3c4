"""Concordance invariants of string links from iterated abelian p-covers.

The package computes Witt-class valued invariants of string links obtained by
infection along curves in a wedge of circles, together with the supporting
machinery: exact prime-power cyclotomic arithmetic with certified signs,
Levine-Tristram signature functions of formal knots, towers of abelian covers
of graphs with their distinguished characters, and Hilbert-symbol arithmetic
for separating Witt classes over Q(zeta_4).
"""

__version__ = "0.1.0"
