"""Static inference for probabilistic PCF with parametric binary choice.

The pipeline: parse and type-check a program, assign every subterm a family
of quantitative refinement typings whose weight polynomials are kept minimal
through Newton-polytope geometry, stabilize the bounded search, and answer
most-likely-trajectory queries either at fixed branch probabilities or as a
region of probabilities.
"""

__version__ = "0.1.0"

from . import algebra, geometry, infer, lang, typesys  # noqa: F401
