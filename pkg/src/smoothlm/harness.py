"""Experiment driver: size sweeps, multi-run averaging, optimization.

One run = one seeded re-split of the corpus.  Within a run, every method
sees bit-identical train/dev1/dev2/test segments; the baseline is always
trained first so each row carries its entropy delta.  Bucketed lambdas
are EM-trained on dev1; scalar hyperparameters are searched against dev2
cross-entropy (Powell for continuous parameters, a log-spaced integer
grid pass for cutoffs); the test segment is touched only for the final
score.  Per-method failures land in the row's error column without
aborting the rest of the sweep.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field
from typing import IO, Sequence

from smoothlm.church_gale import DEFAULT_ENUMERATION_BUDGET, build_church_gale
from smoothlm.corpus import (
    DataError,
    EncodedCorpus,
    SplitSpec,
    Vocabulary,
    build_vocabulary,
    encode,
    load_vocabulary,
    read_sentences,
    recode,
    split_corpus,
)
from smoothlm.counts import NGramTable, accumulate_counts, truncate_corpus
from smoothlm.em import train_interpolated_model
from smoothlm.evaluation import EvaluationReport, cross_entropy
from smoothlm.powell import ObjectiveError, powell_minimize
from smoothlm.smoothing import (
    METHODS,
    SmoothedModel,
    build_additive,
    build_interp,
    build_katz,
    build_one_count,
)

CSV_HEADER = ("method", "order", "train_sentences", "run", "seed",
              "entropy_bits", "delta_bits", "params", "error")

BASELINE = "interp-baseline"


class UsageError(ValueError):
    """Bad configuration or flag combination (CLI exit code 1)."""


@dataclass
class ExperimentConfig:
    corpus: str
    order: int = 2
    methods: list[str] = field(default_factory=lambda: [BASELINE])
    sizes: list[int] = field(default_factory=lambda: [1000])
    runs: int = 1
    seed: int = 0
    dev_words: int = 50_000
    test_words: int = 50_000
    vocab: str = "all"
    fixed_vocab: str | None = None
    optimize: bool = True
    params: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    lowercase: bool = False
    powell_tol: float = 1e-4
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
    block_sentences: int = 10

    def validate(self) -> None:
        if self.order not in (2, 3):
            raise UsageError(f"order must be 2 or 3, got {self.order}")
        if self.runs < 1:
            raise UsageError("runs must be >= 1")
        if not self.sizes or sorted(self.sizes) != list(self.sizes):
            raise UsageError("sizes must be a nonempty ascending list")
        for m in self.methods:
            if m not in METHODS:
                raise UsageError(
                    f"unknown method {m!r}; valid: {', '.join(METHODS)}")
        if self.vocab != "all" and not self.vocab.startswith("min-count:"):
            raise UsageError("vocab must be 'all' or 'min-count:K'")


@dataclass
class ResultRow:
    method: str
    order: int
    train_sentences: int
    run: int
    seed: int
    entropy_bits: float | None
    delta_bits: float | None
    params: dict[str, float]
    error: str | None = None

    def csv_record(self) -> list[str]:
        return [
            self.method,
            str(self.order),
            str(self.train_sentences),
            str(self.run),
            str(self.seed),
            "" if self.entropy_bits is None else repr(self.entropy_bits),
            "" if self.delta_bits is None else repr(self.delta_bits),
            format_params(self.params),
            self.error or "",
        ]


@dataclass
class ExperimentResult:
    rows: list[ResultRow]

    def aggregates(self) -> dict[tuple[str, int], tuple[float, float | None]]:
        return aggregate(self.rows)


def format_params(params: dict[str, float]) -> str:
    def fmt(v: float) -> str:
        return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v)
    return " ".join(f"{k}={fmt(v)}" for k, v in params.items())


def aggregate(rows: Sequence[ResultRow]
              ) -> dict[tuple[str, int], tuple[float, float | None]]:
    """Per-(method, size) mean and sample standard deviation over runs.

    Rows that errored are skipped; singleton groups report no deviation.
    """
    groups: dict[tuple[str, int], list[float]] = {}
    for row in rows:
        if row.error or row.entropy_bits is None:
            continue
        groups.setdefault((row.method, row.train_sentences), []).append(
            row.entropy_bits)
    out = {}
    for key, values in groups.items():
        sd = statistics.stdev(values) if len(values) >= 2 else None
        out[key] = (statistics.fmean(values), sd)
    return out


# -- method parameter specifications ----------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: float
    bounds: tuple[float, float] | None = None
    log: bool = False
    grid: tuple[int, ...] | None = None


_DELTA = ParamSpec("delta", 0.5, bounds=(1e-6, 50.0), log=True)
_KATZ_GRID = (1, 2, 3, 5, 8, 13, 21)
_JM_CMIN_GRID = (50, 100, 200, 400, 800, 1600, 3200, 6400)
_CG_CMIN_GRID = (8, 16, 32, 64, 128, 256, 512, 1024)


def method_params(method: str, order: int) -> list[ParamSpec]:
    if method == BASELINE:
        return [ParamSpec(f"lambda_{k}", 0.5, bounds=(0.0, 1.0))
                for k in range(1, order + 1)]
    if method == "plus-one":
        return []
    if method == "plus-delta":
        return [_DELTA]
    if method == "katz":
        return ([ParamSpec(f"k_{k}", 5, grid=_KATZ_GRID)
                 for k in range(2, order + 1)] + [_DELTA])
    if method == "church-gale":
        return [ParamSpec("c_min", 64, grid=_CG_CMIN_GRID)]
    if method in ("interp-held-out", "interp-del-int", "new-avg-count"):
        return [ParamSpec("c_min", 500, grid=_JM_CMIN_GRID)]
    if method == "new-one-count":
        specs = []
        for k in range(1, order + 1):
            specs.append(ParamSpec(f"beta_{k}", 1.0, bounds=(1e-4, 1e3), log=True))
            specs.append(ParamSpec(f"gamma_{k}", 1.0, bounds=(1e-4, 1e3), log=True))
        return specs
    raise UsageError(f"unknown method {method!r}; valid: {', '.join(METHODS)}")


@dataclass
class TrainContext:
    table: NGramTable
    train: EncodedCorpus
    dev1: EncodedCorpus
    dev2: EncodedCorpus
    order: int
    optimize: bool = True
    overrides: dict[str, float] = field(default_factory=dict)
    frozen: set[str] = field(default_factory=set)
    powell_tol: float = 1e-4
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET


def build_model(method: str, table: NGramTable, params: dict[str, float],
                dev1: EncodedCorpus | None = None,
                train: EncodedCorpus | None = None,
                enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
                ) -> SmoothedModel:
    """Construct a model for fixed parameter values.

    The bucketed interpolation methods train their lambdas as part of the
    build: on dev1 for the held-out variants, by leave-one-out on the
    training corpus for interp-del-int.
    """
    order = table.order
    if method == "plus-one":
        return build_additive(table, 1.0)
    if method == "plus-delta":
        return build_additive(table, params["delta"])
    if method == BASELINE:
        lams = [params[f"lambda_{k}"] for k in range(1, order + 1)]
        return build_interp(table, "baseline", lambdas=lams)
    if method == "katz":
        cuts = [int(params[f"k_{k}"]) for k in range(2, order + 1)]
        return build_katz(table, cuts, params["delta"])
    if method == "church-gale":
        return build_church_gale(table, int(params["c_min"]), enumeration_budget)
    if method in ("interp-held-out", "new-avg-count"):
        if dev1 is None:
            raise DataError(f"{method} needs held-out data to train lambdas")
        scheme = ("average-count" if method == "new-avg-count"
                  else "context-count")
        model, _ = train_interpolated_model(
            table, scheme, int(params["c_min"]), dev1, method=method)
        return model
    if method == "interp-del-int":
        if train is None:
            raise DataError("interp-del-int needs the training corpus")
        model, _ = train_interpolated_model(
            table, "context-count", int(params["c_min"]), train,
            deleted=True, method=method)
        return model
    if method == "new-one-count":
        betas = [params[f"beta_{k}"] for k in range(1, order + 1)]
        gammas = [params[f"gamma_{k}"] for k in range(1, order + 1)]
        return build_one_count(table, betas, gammas)
    raise UsageError(f"unknown method {method!r}; valid: {', '.join(METHODS)}")


def train_method(method: str, ctx: TrainContext
                 ) -> tuple[SmoothedModel, dict[str, float]]:
    """Resolve, optionally optimize, and build one method's model."""
    specs = method_params(method, ctx.order)
    params = {s.name: ctx.overrides.get(s.name, s.default) for s in specs}
    fixed = set(ctx.overrides) | ctx.frozen

    def dev2_bits(p: dict[str, float]) -> float:
        model = build_model(method, ctx.table, p, dev1=ctx.dev1,
                            train=ctx.train,
                            enumeration_budget=ctx.enumeration_budget)
        return cross_entropy(model, ctx.dev2).bits_per_word

    if ctx.optimize:
        grid_specs = [s for s in specs if s.grid and s.name not in fixed]
        cont_specs = [s for s in specs if s.bounds and s.name not in fixed]

        def optimize_continuous(p: dict[str, float]) -> tuple[dict, float]:
            if not cont_specs:
                return dict(p), dev2_bits(p)
            def objective(vec: Sequence[float]) -> float:
                trial = dict(p)
                trial.update(zip((s.name for s in cont_specs), vec))
                return dev2_bits(trial)
            result = powell_minimize(
                objective,
                [p[s.name] for s in cont_specs],
                bounds=[s.bounds for s in cont_specs],
                log_scale=[s.log for s in cont_specs],
                tol=ctx.powell_tol,
            )
            best = dict(p)
            best.update(zip((s.name for s in cont_specs), result.params))
            return best, result.objective

        if grid_specs:
            for gspec in grid_specs:  # one coordinate pass, ascending grids
                best_params, best_bits = None, None
                for value in gspec.grid:
                    trial = dict(params)
                    trial[gspec.name] = value
                    try:
                        trial, bits = optimize_continuous(trial)
                    except ObjectiveError:
                        continue  # candidate zeroes some dev2 event
                    if not math.isfinite(bits):
                        continue
                    if best_bits is None or bits < best_bits:
                        best_params, best_bits = trial, bits
                if best_params is None:
                    raise DataError(
                        f"every {gspec.name} candidate gave non-finite dev2 "
                        f"entropy for {method}")
                params = best_params
        elif cont_specs:
            params, _ = optimize_continuous(params)

    model = build_model(method, ctx.table, params, dev1=ctx.dev1,
                        train=ctx.train,
                        enumeration_budget=ctx.enumeration_budget)
    return model, params


# -- corpus plumbing ---------------------------------------------------------

def _parse_vocab_policy(policy: str) -> int | None:
    if policy == "all":
        return None
    return int(policy.split(":", 1)[1])


def _segment_tokens(segment: EncodedCorpus, prelim: Vocabulary):
    eos = prelim.eos_id
    for sent in segment:
        for wid in sent:
            if wid != eos:
                yield prelim.tokens[wid]


def _vocab_from_segment(segment: EncodedCorpus, prelim: Vocabulary,
                        policy: str) -> Vocabulary:
    return build_vocabulary(_segment_tokens(segment, prelim),
                            min_count=_parse_vocab_policy(policy),
                            add_unk=True)


@dataclass
class _PreparedCell:
    """Everything one (run, size) cell shares across methods."""
    table: NGramTable
    train: EncodedCorpus
    dev1: EncodedCorpus
    dev2: EncodedCorpus
    test: EncodedCorpus


def _prepare_corpus(config: ExperimentConfig
                    ) -> tuple[Vocabulary, EncodedCorpus]:
    sentences = read_sentences(config.corpus, lowercase=config.lowercase)
    if not sentences:
        raise DataError(f"no sentences in {config.corpus}")
    prelim = build_vocabulary(t for s in sentences for t in s)
    return prelim, encode(sentences, prelim)


def _prepare_cell(config: ExperimentConfig, split, size: int,
                  prelim: Vocabulary, run_vocab: Vocabulary | None
                  ) -> _PreparedCell:
    train_m = truncate_corpus(split.train, size)
    if run_vocab is not None:
        vocab = run_vocab
    else:
        vocab = _vocab_from_segment(train_m, prelim, config.vocab)
    train = recode(train_m, prelim, vocab)
    return _PreparedCell(
        table=accumulate_counts(train, config.order, vocab),
        train=train,
        dev1=recode(split.dev1, prelim, vocab),
        dev2=recode(split.dev2, prelim, vocab),
        test=recode(split.test, prelim, vocab),
    )


def _run_vocab(config: ExperimentConfig, split, prelim: Vocabulary
               ) -> Vocabulary | None:
    """Fixed vocabulary for a run, or None to rebuild per size.

    With multiple sizes the vocabulary comes from the largest training
    segment so entropies stay comparable across sizes.
    """
    if config.fixed_vocab:
        return load_vocabulary(config.fixed_vocab)
    if len(config.sizes) > 1:
        return _vocab_from_segment(split.train, prelim, config.vocab)
    return None


def _ordered_methods(config: ExperimentConfig) -> list[str]:
    rest = [m for m in config.methods if m != BASELINE]
    return [BASELINE] + rest


class _RowSink:
    """Accumulates rows, mirroring them incrementally to a CSV file."""

    def __init__(self, out: str | None):
        self.rows: list[ResultRow] = []
        self._handle: IO[str] | None = None
        self._writer = None
        if out:
            self._handle = open(out, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._handle)
            self._writer.writerow(CSV_HEADER)

    def emit(self, row: ResultRow) -> None:
        self.rows.append(row)
        if self._writer is not None:
            self._writer.writerow(row.csv_record())
            self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Full protocol: per run, re-split, then train/score each method."""
    config.validate()
    prelim, full = _prepare_corpus(config)
    methods = _ordered_methods(config)
    sink = _RowSink(config.out)
    try:
        for run in range(config.runs):
            seed = config.seed + run
            split = split_corpus(full, SplitSpec(
                train_sentences=max(config.sizes),
                dev1_words=config.dev_words,
                dev2_words=config.dev_words,
                test_words=config.test_words,
                shuffle_seed=seed,
                block_sentences=config.block_sentences,
            ))
            run_vocab = _run_vocab(config, split, prelim)
            for size in config.sizes:
                cell = _prepare_cell(config, split, size, prelim, run_vocab)
                ctx = TrainContext(
                    table=cell.table, train=cell.train, dev1=cell.dev1,
                    dev2=cell.dev2, order=config.order,
                    optimize=config.optimize, overrides=dict(config.params),
                    powell_tol=config.powell_tol,
                    enumeration_budget=config.enumeration_budget,
                )
                baseline_report = None
                for method in methods:
                    row = ResultRow(method, config.order, size, run, seed,
                                    None, None, {})
                    try:
                        model, params = train_method(method, ctx)
                        report = cross_entropy(model, cell.test)
                        row.entropy_bits = report.bits_per_word
                        row.params = params
                        if method == BASELINE:
                            baseline_report = report
                        if baseline_report is not None:
                            row.delta_bits = (report.bits_per_word
                                              - baseline_report.bits_per_word)
                    except Exception as exc:  # isolate per-method failures
                        row.error = f"{type(exc).__name__}: {exc}".replace(
                            "\n", " ")
                    sink.emit(row)
    finally:
        sink.close()
    return ExperimentResult(sink.rows)


def sweep_parameter(config: ExperimentConfig, method: str, param: str,
                    grid: Sequence[float]) -> ExperimentResult:
    """Entropy-vs-parameter curves: one row per (size, grid value).

    Remaining parameters are taken from the config or optimized once per
    size with the swept parameter held at its default.
    """
    config.validate()
    specs = method_params(method, config.order)
    names = [s.name for s in specs]
    if param not in names:
        raise UsageError(
            f"method {method} has no parameter {param!r}; "
            f"valid: {', '.join(names) or '(none)'}")
    if not grid:
        raise UsageError("empty sweep grid")

    prelim, full = _prepare_corpus(config)
    sink = _RowSink(config.out)
    try:
        split = split_corpus(full, SplitSpec(
            train_sentences=max(config.sizes),
            dev1_words=config.dev_words,
            dev2_words=config.dev_words,
            test_words=config.test_words,
            shuffle_seed=config.seed,
            block_sentences=config.block_sentences,
        ))
        run_vocab = _run_vocab(config, split, prelim)
        for size in config.sizes:
            cell = _prepare_cell(config, split, size, prelim, run_vocab)
            ctx = TrainContext(
                table=cell.table, train=cell.train, dev1=cell.dev1,
                dev2=cell.dev2, order=config.order,
                optimize=config.optimize, overrides=dict(config.params),
                frozen={param}, powell_tol=config.powell_tol,
                enumeration_budget=config.enumeration_budget,
            )
            _, base_params = train_method(method, ctx)
            for value in grid:
                row = ResultRow(method, config.order, size, 0, config.seed,
                                None, None, {})
                try:
                    params = dict(base_params)
                    params[param] = value
                    model = build_model(
                        method, cell.table, params, dev1=cell.dev1,
                        train=cell.train,
                        enumeration_budget=config.enumeration_budget)
                    report = cross_entropy(model, cell.test)
                    row.entropy_bits = report.bits_per_word
                    row.params = params
                except Exception as exc:
                    row.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
                sink.emit(row)
    finally:
        sink.close()
    return ExperimentResult(sink.rows)


def evaluate_once(model_config: dict, test_path: str) -> EvaluationReport:
    """One-off scoring: train on a corpus file, score a test file."""
    method = model_config.get("method")
    if method not in METHODS:
        raise UsageError(
            f"unknown method {method!r}; valid: {', '.join(METHODS)}")
    order = int(model_config.get("order", 2))
    if order not in (2, 3):
        raise UsageError(f"order must be 2 or 3, got {order}")
    train_sents = read_sentences(model_config["corpus"],
                                 lowercase=model_config.get("lowercase", False))
    if not train_sents:
        raise DataError(f"no sentences in {model_config['corpus']}")
    vocab = build_vocabulary(
        (t for s in train_sents for t in s),
        min_count=_parse_vocab_policy(model_config.get("vocab", "all")),
        add_unk=True)
    train = encode(train_sents, vocab)
    table = accumulate_counts(train, order, vocab)
    specs = method_params(method, order)
    user = model_config.get("params", {})
    params = {s.name: float(user.get(s.name, s.default)) for s in specs}
    dev1 = None
    if model_config.get("dev"):
        dev1 = encode(read_sentences(model_config["dev"]), vocab)
    model = build_model(
        method, table, params, dev1=dev1, train=train,
        enumeration_budget=int(model_config.get(
            "enumeration_budget", DEFAULT_ENUMERATION_BUDGET)))
    test = encode(read_sentences(test_path), vocab)
    return cross_entropy(model, test)
