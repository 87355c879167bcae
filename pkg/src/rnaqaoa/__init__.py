"""RNA secondary structure prediction via stem-selection QUBO and QAOA."""

__version__ = "0.1.0"

from .qubo import QuboParams
from .rna import Sequence, Stem, StemSet, enumerate_stems
from .qaoa import QaoaConfig, solve

__all__ = [
    "QaoaConfig",
    "QuboParams",
    "Sequence",
    "Stem",
    "StemSet",
    "enumerate_stems",
    "solve",
    "__version__",
]
