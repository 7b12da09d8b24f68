"""Finite-depth dyadic harmonic analysis: Haar data, paraproducts, weights and sparse forms."""

__version__ = "0.1.0"

from .lattice import ROOT, DyadicInterval, Lattice, LatticeError, haar_value
from .stepfun import StepFunction, analyze, haar_function, indicator, synthesize, synthesize_haar
from .symbols import SymbolSequence, cm_norm, e_sequence, linf_norm, schur, sweep
from .paraproducts import compose, pi, pi_star, martingale, to_matrix
from .weights import Weight, a_infty_characteristic, a_p_characteristic
from .sparse import SparseCollection, verify_sparse
