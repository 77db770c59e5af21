import io
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlm.corpus import DataError, EncodedCorpus, build_vocabulary, encode
from smoothlm.counts import (
    accumulate_counts,
    context_stats,
    count_of_counts,
    dump_counts,
    truncate_corpus,
)


def brute_force_counts(corpus, order, vocab):
    """Independent recount: slice every padded sentence directly."""
    grams = Counter()
    contexts = Counter()
    for sent in corpus:
        padded = [vocab.bos_id] * (order - 1) + list(sent)
        for pos in range(order - 1, len(padded)):
            for k in range(1, order + 1):
                gram = tuple(padded[pos - k + 1:pos + 1])
                grams[gram] += 1
                contexts[gram[:-1]] += 1
    return grams, contexts


def tables_equal(table, grams, contexts):
    stored = {ctx + (w,): c for ctx, succ in table.successors.items()
              for w, c in succ.items()}
    assert stored == dict(grams)
    assert table.context_totals == dict(contexts)


class TestAccumulate:
    def test_toy_enumeration(self, toy_table, toy_ids):
        a, b, eos, bos = (toy_ids[k] for k in ("a", "b", "eos", "bos"))
        assert toy_table.count((a, b)) == 2
        assert toy_table.count((b, eos)) == 2
        assert toy_table.count((bos, a)) == 2
        assert toy_table.count((bos, b)) == 1
        assert toy_table.count((b, a)) == 1
        assert toy_table.count((a, eos)) == 1
        assert toy_table.count((a,)) == toy_table.count((b,)) == 3
        assert toy_table.count((eos,)) == 3
        assert toy_table.total_words == 9

    def test_toy_against_brute_force(self, toy_corpus, toy_vocab, toy_table):
        grams, contexts = brute_force_counts(toy_corpus, 2, toy_vocab)
        tables_equal(toy_table, grams, contexts)

    def test_trigram_padding_rule(self):
        vocab = build_vocabulary(["a"])
        corpus = encode([["a"]], vocab)
        table = accumulate_counts(corpus, 3, vocab)
        a, eos, bos = vocab.index["a"], vocab.eos_id, vocab.bos_id
        assert table.count((bos, bos, a)) == 1
        assert table.count((bos, a, eos)) == 1
        assert table.total_words == 2

    def test_empty_corpus(self, toy_vocab):
        table = accumulate_counts(EncodedCorpus([]), 2, toy_vocab)
        assert table.total_words == 0
        assert not table.successors

    def test_bad_order(self, toy_corpus, toy_vocab):
        with pytest.raises(ValueError):
            accumulate_counts(toy_corpus, 0, toy_vocab)

    @given(st.lists(st.lists(st.sampled_from("abcd"), min_size=0, max_size=6),
                    min_size=1, max_size=10),
           st.integers(min_value=1, max_value=3))
    @settings(max_examples=60)
    def test_matches_brute_force(self, raw, order):
        vocab = build_vocabulary("abcd")
        corpus = encode(raw, vocab)
        table = accumulate_counts(corpus, order, vocab)
        grams, contexts = brute_force_counts(corpus, order, vocab)
        tables_equal(table, grams, contexts)

    @given(st.lists(st.lists(st.sampled_from("abcd"), min_size=0, max_size=6),
                    min_size=1, max_size=10),
           st.integers(min_value=1, max_value=3))
    @settings(max_examples=60)
    def test_marginal_consistency(self, raw, order):
        vocab = build_vocabulary("abcd")
        table = accumulate_counts(encode(raw, vocab), order, vocab)
        for ctx, succ in table.successors.items():
            assert table.context_totals[ctx] == sum(succ.values())

    def test_count_conservation(self, sample_table, sample_corpus):
        assert sum(sample_table.successors[()].values()) == \
            sample_corpus.word_count
        top = sum(cnt for _, _, cnt in sample_table.grams(sample_table.order))
        assert top == sample_corpus.word_count


class TestContextStats:
    def test_toy_context_a(self, toy_table, toy_ids):
        assert context_stats(toy_table, (toy_ids["a"],)) == (3, 2, 1, 1.5)

    def test_toy_context_bos(self, toy_table, toy_ids):
        assert context_stats(toy_table, (toy_ids["bos"],)) == (3, 2, 1, 1.5)

    def test_unseen_context(self, toy_table, toy_ids):
        assert context_stats(toy_table, (toy_ids["eos"],)) == (0, 0, 0, 0.0)


class TestCountOfCounts:
    def test_toy_bigrams(self, toy_table):
        coc = count_of_counts(toy_table, 2)
        assert coc.counts == {1: 3, 2: 3}
        assert coc.token_mass() == 9

    def test_toy_unigrams(self, toy_table):
        assert count_of_counts(toy_table, 1).counts == {3: 3}

    def test_empty_table(self, toy_vocab):
        table = accumulate_counts(EncodedCorpus([]), 2, toy_vocab)
        assert count_of_counts(table, 2).counts == {}

    def test_order_above_table(self, toy_table):
        with pytest.raises(ValueError):
            count_of_counts(toy_table, 3)

    def test_rows_sorted(self, sample_table):
        rows = count_of_counts(sample_table, 2).rows()
        assert rows == sorted(rows)
        assert all(n > 0 for _, n in rows)


class TestTruncate:
    def test_prefix(self, sample_corpus):
        out = truncate_corpus(sample_corpus, 10)
        assert out.sentences == sample_corpus.sentences[:10]

    def test_identity(self, sample_corpus):
        out = truncate_corpus(sample_corpus, len(sample_corpus))
        assert out.sentences == sample_corpus.sentences

    def test_zero(self, sample_corpus):
        assert truncate_corpus(sample_corpus, 0).word_count == 0

    def test_too_many(self, sample_corpus):
        with pytest.raises(DataError):
            truncate_corpus(sample_corpus, len(sample_corpus) + 1)

    def test_nesting(self, sample_corpus, sample_vocab):
        small = accumulate_counts(truncate_corpus(sample_corpus, 50), 2,
                                  sample_vocab)
        large = accumulate_counts(truncate_corpus(sample_corpus, 200), 2,
                                  sample_vocab)
        for ctx, succ in small.successors.items():
            for w, c in succ.items():
                assert c <= large.successors[ctx][w]


def test_dump_counts_sorted(toy_table):
    out = io.StringIO()
    dump_counts(toy_table, 2, out)
    lines = out.getvalue().splitlines()
    keys = [tuple(int(x) for x in line.split("\t")[0].split()) for line in lines]
    assert keys == sorted(keys)
    assert all(int(line.split("\t")[1]) > 0 for line in lines)
    assert len(lines) == 6
