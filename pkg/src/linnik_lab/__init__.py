"""linnik_lab: desk-scale audits of sign changes of multiplicative functions
in arithmetic progressions.

Submodules: arith, multfunc, group, sieve, setcomb, densemodel, charsums,
pipeline, cli.
"""

__version__ = "0.1.0"
