"""Cross-entropy scoring (bits per word) and baseline-relative deltas."""

from __future__ import annotations

import math
from dataclasses import dataclass

from smoothlm.corpus import DataError, EncodedCorpus
from smoothlm.counts import Gram
from smoothlm.smoothing import SmoothedModel


@dataclass
class EvaluationReport:
    """Per-segment score: cross-entropy, perplexity and optional deltas.

    zero_event names the first (context, word) that received probability
    zero (possible only under pure ML), in which case bits_per_word is
    +inf.
    """

    bits_per_word: float
    word_count: int
    total_log2_prob: float
    perplexity: float
    delta_vs_baseline_bits: float | None = None
    delta_as_perplexity_percent: float | None = None
    zero_event: tuple[Gram, int] | None = None

    def to_line(self) -> str:
        parts = [
            f"bits_per_word={self.bits_per_word!r}",
            f"word_count={self.word_count}",
            f"perplexity={self.perplexity!r}",
        ]
        if self.delta_vs_baseline_bits is not None:
            parts.append(f"delta_bits={self.delta_vs_baseline_bits!r}")
            parts.append(f"delta_perplexity_pct={self.delta_as_perplexity_percent!r}")
        if self.zero_event is not None:
            ctx, w = self.zero_event
            parts.append(f"zero_event={' '.join(map(str, ctx))}->{w}")
        return " ".join(parts)


def _find_zero_event(model: SmoothedModel, sentence: list[int]) -> tuple[Gram, int]:
    for ctx, w in model.events(sentence):
        if model.cond_prob(ctx, w) <= 0.0:
            return ctx, w
    raise AssertionError("sentence scored -inf but no zero event found")


def cross_entropy(model: SmoothedModel, test: EncodedCorpus) -> EvaluationReport:
    """Average -log2 probability per predicted token over a test segment.

    Sentence log-probabilities are combined with compensated summation.
    A zero-probability event yields +inf with the event identified rather
    than an exception.
    """
    if test.word_count == 0:
        raise DataError("cannot evaluate on an empty test segment")
    sentence_logs = []
    for sent in test:
        lp = model.sequence_logprob(sent)
        if lp == -math.inf:
            return EvaluationReport(
                bits_per_word=math.inf,
                word_count=test.word_count,
                total_log2_prob=-math.inf,
                perplexity=math.inf,
                zero_event=_find_zero_event(model, sent),
            )
        sentence_logs.append(lp)
    total = math.fsum(sentence_logs)
    bits = -total / test.word_count
    return EvaluationReport(
        bits_per_word=bits,
        word_count=test.word_count,
        total_log2_prob=total,
        perplexity=2.0 ** bits,
    )


def entropy_delta(model_report: EvaluationReport,
                  baseline_report: EvaluationReport) -> tuple[float, float]:
    """(bits difference, perplexity percent change) versus a baseline.

    Both reports must cover the identical test segment.
    """
    if model_report.word_count != baseline_report.word_count:
        raise DataError(
            f"reports cover different segments: N_T "
            f"{model_report.word_count} vs {baseline_report.word_count}")
    bits = model_report.bits_per_word - baseline_report.bits_per_word
    return bits, 100.0 * (2.0 ** bits - 1.0)


def attach_delta(report: EvaluationReport, baseline: EvaluationReport) -> EvaluationReport:
    """Fill the delta fields of a report in place and return it."""
    bits, pct = entropy_delta(report, baseline)
    report.delta_vs_baseline_bits = bits
    report.delta_as_perplexity_percent = pct
    return report
