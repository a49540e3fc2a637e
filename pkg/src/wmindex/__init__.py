"""Pattern indexing for weighted strings via minimizer-sampled solid factor trees."""

from wmindex.core import (
    Alphabet,
    DataFormatError,
    HeavyContext,
    Threshold,
    UnknownLetterError,
    WeightedString,
    brute_force_occurrences,
    build_heavy_context,
    is_valid,
    occurrence_probability,
    parse_weighted_string,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "DataFormatError",
    "HeavyContext",
    "Threshold",
    "UnknownLetterError",
    "WeightedString",
    "brute_force_occurrences",
    "build_heavy_context",
    "is_valid",
    "occurrence_probability",
    "parse_weighted_string",
    "__version__",
]
