"""Smoothing testbed for n-gram language models.

Trains bigram/trigram models from whitespace-tokenized text and compares
smoothing methods by held-out cross-entropy (bits per word), with automated
parameter optimization and a multi-run experiment harness.
"""

from smoothlm.corpus import (
    BOS_TOKEN,
    EOS_TOKEN,
    UNK_TOKEN,
    EncodedCorpus,
    SplitSpec,
    Vocabulary,
    build_vocabulary,
    encode,
    split_corpus,
    tokenize,
)
from smoothlm.counts import (
    CountOfCounts,
    NGramTable,
    accumulate_counts,
    context_stats,
    count_of_counts,
    truncate_corpus,
)
from smoothlm.evaluation import EvaluationReport, cross_entropy, entropy_delta
from smoothlm.good_turing import (
    GoodTuringError,
    GoodTuringEstimator,
    fit_simple_good_turing,
    gt_adjusted_count,
)
from smoothlm.harness import ExperimentConfig, aggregate, run_experiment, sweep_parameter
from smoothlm.powell import OptimizerResult, powell_minimize
from smoothlm.smoothing import (
    METHODS,
    BucketMap,
    MaximumLikelihoodModel,
    SmoothedModel,
    UniformModel,
    bucket_statistic,
    build_additive,
    build_interp,
    build_katz,
    build_one_count,
)
from smoothlm.church_gale import build_church_gale

__all__ = [
    "BOS_TOKEN",
    "EOS_TOKEN",
    "UNK_TOKEN",
    "EncodedCorpus",
    "SplitSpec",
    "Vocabulary",
    "build_vocabulary",
    "encode",
    "split_corpus",
    "tokenize",
    "CountOfCounts",
    "NGramTable",
    "accumulate_counts",
    "context_stats",
    "count_of_counts",
    "truncate_corpus",
    "EvaluationReport",
    "cross_entropy",
    "entropy_delta",
    "GoodTuringError",
    "GoodTuringEstimator",
    "fit_simple_good_turing",
    "gt_adjusted_count",
    "ExperimentConfig",
    "aggregate",
    "run_experiment",
    "sweep_parameter",
    "OptimizerResult",
    "powell_minimize",
    "METHODS",
    "BucketMap",
    "MaximumLikelihoodModel",
    "SmoothedModel",
    "UniformModel",
    "bucket_statistic",
    "build_additive",
    "build_interp",
    "build_katz",
    "build_one_count",
    "build_church_gale",
]
