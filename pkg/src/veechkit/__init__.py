"""Veech groups of flat surfaces presented as parallelogram decompositions."""

from .affine import act, enumerate_group, membership, refine_rational
from .exact import Direction, Mat2, Scalar, parse_matrix, parse_scalar
from .geometry import realize, redecompose, trace_direction
from .invariants import surface_type, vertex_classes
from .io import load_document, parse_document, to_document
from .iso import canonical_form, find_isomorphism
from .origami import ExtendedOrigami, normalize_signs, solve_heights, validate
from .pdecomp import PDecomposition

__all__ = [
    "Direction",
    "ExtendedOrigami",
    "Mat2",
    "PDecomposition",
    "Scalar",
    "act",
    "canonical_form",
    "enumerate_group",
    "find_isomorphism",
    "load_document",
    "membership",
    "normalize_signs",
    "parse_document",
    "parse_matrix",
    "parse_scalar",
    "realize",
    "redecompose",
    "refine_rational",
    "solve_heights",
    "surface_type",
    "to_document",
    "trace_direction",
    "validate",
    "vertex_classes",
]
