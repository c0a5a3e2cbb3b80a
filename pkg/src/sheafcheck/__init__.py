"""Exact checkers for real-indexed tower constancy, cellular sheaf sections,
non-characteristic deformations, and micro-support on PL data.

All arithmetic is exact (Fraction / int / mod-p int); every reported verdict
is deterministic and byte-reproducible.
"""

__version__ = "0.1.0"
