"""Exact computations in the discrete affine group DA(T) of a regular tree."""
from .group import (
    Element,
    act,
    alpha_power,
    delta,
    evaluate_word,
    identity,
    inverse,
    multiply,
    parse,
    phi,
    serialize,
)
from .metric import witness_word, word_length
from .tree import ORIGIN, Vertex, distance, ray_vertex

__version__ = "0.1.0"
