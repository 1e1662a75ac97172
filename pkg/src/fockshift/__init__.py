"""Weighted multi-shifts on truncated Fock spaces and similarity models for matrix tuples."""
from .errors import CapExceeded, PreconditionError
from .freeword import enumerate_words, graded_index, index_word, abelianization, words_in_class
from .weights import WeightSequence, make_family, interpolate_from_sequence, from_tuple_norms
from .model import OperatorTuple
from .hardy import Symbol

__all__ = [
    "CapExceeded", "PreconditionError", "enumerate_words", "graded_index", "index_word",
    "abelianization", "words_in_class", "WeightSequence", "make_family",
    "interpolate_from_sequence", "from_tuple_norms", "OperatorTuple", "Symbol",
]
