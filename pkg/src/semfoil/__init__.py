"""Semantic foil induction and embedding benchmarking over AMR graphs."""

from .backends import Embedding, ModelBackends, NliVerdict, build_transport
from .bench import EvalReport, SimilarityTriple, evaluate_model
from .graph import AmrGraph, GraphError, same_triples
from .penman import PenmanError, parse_penman, serialize_penman, to_triples
from .pipeline import (
    FilterSpec,
    FoilRecord,
    InduceOptions,
    ParaphrasePair,
    contradiction_filter,
    dataset_stats,
    induce_dataset,
    transform_sentence,
)
from .transforms import (
    AppliedManipulation,
    ManipulationType,
    NoManipulationApplicable,
    NotApplicable,
    antonym_replacement,
    apply_random,
    hypernym_substitution,
    polarity_negation,
    role_swap,
    underspecification,
)
from .wordnet import LemmaKey, Pos, WordnetDb, antonyms, hypernyms, load_database

__version__ = "0.1.0"

__all__ = [
    "AmrGraph",
    "AppliedManipulation",
    "Embedding",
    "EvalReport",
    "FilterSpec",
    "FoilRecord",
    "GraphError",
    "InduceOptions",
    "LemmaKey",
    "ManipulationType",
    "ModelBackends",
    "NliVerdict",
    "NoManipulationApplicable",
    "NotApplicable",
    "ParaphrasePair",
    "PenmanError",
    "Pos",
    "SimilarityTriple",
    "WordnetDb",
    "antonyms",
    "antonym_replacement",
    "apply_random",
    "build_transport",
    "contradiction_filter",
    "dataset_stats",
    "evaluate_model",
    "hypernym_substitution",
    "hypernyms",
    "induce_dataset",
    "load_database",
    "parse_penman",
    "polarity_negation",
    "role_swap",
    "same_triples",
    "serialize_penman",
    "to_triples",
    "transform_sentence",
    "underspecification",
]
