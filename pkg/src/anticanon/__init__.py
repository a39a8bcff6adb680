"""Invariant decompositions and canonical forms for anti-commuting operator families."""
