"""Symbolic heaps, the pure solver and the expression translator."""

from .heap import (
    EntailmentFailure, Env, PointsToChunk, PredChunk, SymbolicHeap,
    UnboundedIteration, check_pure, consume, fold, produce, unfold,
)
from .solver import Verdict, check, simplify
from .translate import EvalError, Translator

__all__ = [
    "EntailmentFailure", "Env", "EvalError", "PointsToChunk", "PredChunk",
    "SymbolicHeap", "Translator", "UnboundedIteration", "Verdict", "check",
    "check_pure", "consume", "fold", "produce", "simplify", "unfold",
]
