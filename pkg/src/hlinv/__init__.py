"""Milnor link-homotopy invariants and hypermatrix invariants of handlebody-links."""
from .magnus import (
    Letter, ParseError, ReducedSeries, Residue, Word, WordLink, commutator, delta, expand,
    invert, mu, mu_bar, parse_word,
)
from .hypermatrix import (
    Hypermatrix, Matrix, Move, RankBounds, apply_move, apply_moves, elementary_divisors, flatten,
    hyperdeterminant, multilinear_rank, reduce_mod, smith_normal_form, tensor_rank_bounds,
)
from .handlebody import (
    ClasperSchema, Component, HandlebodyPresentation, InvariantDatum, apply_gl, band_sum,
    canonical_sequences, delta_I, from_clasper_schema, hypermatrix_of, reverse_circle, swap_circles,
)

__version__ = "0.1.0"
