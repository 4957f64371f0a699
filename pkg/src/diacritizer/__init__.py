"""Diacritic restoration toolkit for Maghrebi Arabic dialects.

Three diacritizers over a shared Buckwalter text model: a most-frequent
form lookup, a character-level linear-chain CRF, and a two-layer
BiLSTM-CRF neural tagger, plus corpus analytics and an experiment
harness.
"""

from .script import (
    DiacriticTag,
    NONE_TAG,
    TaggedWord,
    TagSet,
    apply_tags,
    induce_tagset,
    strip_word,
    transliterate,
)
from .corpus import (
    Corpus,
    CorpusStats,
    FoldSplit,
    Verse,
    compute_stats,
    cross_dialect_overlap,
    load_corpus,
    make_folds,
    overlap_stats,
    save_corpus,
)
from .synth import SynthConfig, SynthResult, synth_generate
from .lookup import LookupTable, build_lookup, hybrid_diacritize, lookup_diacritize
from .brown import BrownClustering, brown_cluster
from .crf import CrfModel, crf_decode, crf_log_partition, crf_train, extract_features
from .neural import (
    NeuralConfig,
    NeuralModel,
    TrainHistory,
    decode,
    forward,
    grad_check,
    init_model,
    predict_text,
    sequence_nll,
    train,
)
from .evaluation import (
    ConfusionMatrix,
    ErrorBreakdown,
    EvalReport,
    confusion,
    diacritic_breakdown,
    score,
    top_errors,
)
from .experiments import ExperimentSpec, ExperimentResult, run_experiment

__version__ = "0.1.0"
