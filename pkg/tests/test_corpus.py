import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlm.corpus import (
    BOS_TOKEN,
    DataError,
    EOS_TOKEN,
    SplitSpec,
    UNK_TOKEN,
    build_vocabulary,
    decode,
    encode,
    load_vocabulary,
    read_sentences,
    recode,
    split_corpus,
    tokenize,
)

words = st.text(alphabet="abcdefg", min_size=1, max_size=4)
sentence_lists = st.lists(st.lists(words, min_size=0, max_size=8),
                          min_size=1, max_size=12)


class TestTokenize:
    def test_plain_split(self):
        assert tokenize("the cat sat") == ["the", "cat", "sat"]

    def test_run_collapsing(self):
        assert tokenize("  a  b ") == ["a", "b"]

    def test_empty_line(self):
        assert tokenize("") == []

    def test_lowercase_flag(self):
        assert tokenize("The CAT", lowercase=True) == ["the", "cat"]
        assert tokenize("The CAT") == ["The", "CAT"]

    def test_tabs_and_mixed_whitespace(self):
        assert tokenize("a\tb\n") == ["a", "b"]


class TestVocabulary:
    def test_all_words(self):
        vocab = build_vocabulary(["a", "a", "a", "b"])
        assert set(vocab.tokens) == {"a", "b", EOS_TOKEN, BOS_TOKEN}
        assert vocab.n_predictable == 3
        assert vocab.unk_id is None

    def test_min_count_threshold(self):
        vocab = build_vocabulary(["a", "a", "a", "b"], min_count=2)
        assert set(vocab.tokens) == {"a", UNK_TOKEN, EOS_TOKEN, BOS_TOKEN}
        assert vocab.unk_id is not None

    def test_empty_corpus(self):
        with pytest.raises(DataError, match="empty corpus"):
            build_vocabulary([])

    def test_min_count_below_one(self):
        with pytest.raises(ValueError):
            build_vocabulary(["a"], min_count=0)

    def test_reserved_token_rejected(self):
        with pytest.raises(DataError, match="reserved"):
            build_vocabulary(["a", EOS_TOKEN])

    def test_bijection_and_bos_last(self):
        vocab = build_vocabulary(["x", "y", "z"], add_unk=True)
        assert sorted(vocab.index.values()) == list(range(vocab.size))
        assert vocab.bos_id == vocab.size - 1
        assert vocab.predictable_ids() == range(vocab.size - 1)

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocabulary(["a", "a", "b"], min_count=1)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        loaded = load_vocabulary(path)
        assert loaded.tokens == vocab.tokens
        assert loaded.unk_id == vocab.unk_id


class TestEncode:
    def test_basic(self):
        vocab = build_vocabulary(["a", "b"])
        corpus = encode([["a", "b"]], vocab)
        assert corpus.sentences == [[vocab.index["a"], vocab.index["b"],
                                     vocab.eos_id]]
        assert corpus.word_count == 3

    def test_unk_mapping(self):
        vocab = build_vocabulary(["a", "a"], min_count=2)
        corpus = encode([["a", "c"]], vocab)
        assert corpus.sentences == [[vocab.index["a"], vocab.unk_id,
                                     vocab.eos_id]]

    def test_oov_error_names_token(self):
        vocab = build_vocabulary(["a"])
        with pytest.raises(DataError, match="'c'"):
            encode([["a", "c"]], vocab)

    def test_empty_sentence_becomes_eos(self):
        vocab = build_vocabulary(["a"])
        corpus = encode([[]], vocab)
        assert corpus.sentences == [[vocab.eos_id]]
        assert corpus.word_count == 1

    @given(sentence_lists)
    @settings(max_examples=50)
    def test_round_trip(self, sentences):
        tokens = [t for s in sentences for t in s]
        if not tokens:
            return
        vocab = build_vocabulary(tokens)
        corpus = encode(sentences, vocab)
        for original, enc in zip(sentences, corpus.sentences):
            assert decode(enc, vocab) == original

    def test_recode_maps_to_unk(self):
        old = build_vocabulary(["a", "b"])
        new = build_vocabulary(["a", "a"], min_count=2)
        corpus = encode([["a", "b"]], old)
        recoded = recode(corpus, old, new)
        assert recoded.sentences == [[new.index["a"], new.unk_id, new.eos_id]]


def _uniform_corpus(n_sentences, sentence_len, vocab):
    sents = [["a"] * sentence_len for _ in range(n_sentences)]
    return encode(sents, vocab)


class TestSplit:
    @pytest.fixture()
    def vocab(self):
        return build_vocabulary(["a", "b"])

    def test_spec_example(self, vocab):
        corpus = _uniform_corpus(100, 9, vocab)  # 10 words with EOS
        spec = SplitSpec(train_sentences=50, dev1_words=100, dev2_words=100,
                         test_words=100, shuffle_seed=7)
        split = split_corpus(corpus, spec)
        assert len(split.dev1) == len(split.dev2) == len(split.test) == 10
        assert len(split.train) == 50
        ids = [id(s) for seg in (split.train, split.dev1, split.dev2, split.test)
               for s in seg.sentences]
        assert len(ids) == len(set(ids)), "segments overlap"

    def test_determinism(self, vocab):
        corpus = _uniform_corpus(100, 9, vocab)
        spec = SplitSpec(50, 100, 100, 100, shuffle_seed=7)
        first = split_corpus(corpus, spec)
        second = split_corpus(corpus, spec)
        for a, b in zip((first.train, first.dev1, first.dev2, first.test),
                        (second.train, second.dev1, second.dev2, second.test)):
            assert a.sentences == b.sentences

    def test_different_seeds_differ(self, vocab):
        sents = [["a"] * (1 + i % 7) for i in range(200)]
        corpus = encode(sents, vocab)
        spec7 = SplitSpec(50, 100, 100, 100, shuffle_seed=7)
        spec8 = SplitSpec(50, 100, 100, 100, shuffle_seed=8)
        assert (split_corpus(corpus, spec7).train.sentences
                != split_corpus(corpus, spec8).train.sentences)

    def test_insufficient_data(self, vocab):
        corpus = _uniform_corpus(100, 9, vocab)  # 1,000 words total
        spec = SplitSpec(1, 2000, 0, 0, shuffle_seed=0)
        with pytest.raises(DataError, match="required 2000"):
            split_corpus(corpus, spec)

    def test_insufficient_train_sentences(self, vocab):
        corpus = _uniform_corpus(30, 9, vocab)
        spec = SplitSpec(25, 100, 100, 100, shuffle_seed=0)
        with pytest.raises(DataError, match="train"):
            split_corpus(corpus, spec)

    def test_overshoot_guard(self, vocab):
        corpus = _uniform_corpus(40, 149, vocab)  # 150-word sentences
        spec = SplitSpec(1, 100, 0, 0, shuffle_seed=0)
        with pytest.raises(DataError, match="overshoots"):
            split_corpus(corpus, spec)

    def test_word_targets_met(self, vocab):
        sents = [["a"] * (1 + i % 13) for i in range(500)]
        corpus = encode(sents, vocab)
        spec = SplitSpec(10, 300, 200, 250, shuffle_seed=3)
        split = split_corpus(corpus, spec)
        assert split.dev1.word_count >= 300
        assert split.dev2.word_count >= 200
        assert split.test.word_count >= 250
        assert split.dev1.word_count <= 1.1 * 300


def test_read_sentences_skips_empty_lines(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("a b\n\n  \nc\n", encoding="utf-8")
    assert read_sentences(path) == [["a", "b"], ["c"]]
