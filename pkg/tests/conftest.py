import pytest

from smoothlm.corpus import build_vocabulary, encode
from smoothlm.counts import accumulate_counts
from smoothlm.synthetic import generate_corpus

TOY_SENTENCES = [["a", "b"], ["a", "b"], ["b", "a"]]


@pytest.fixture(scope="session")
def toy_vocab():
    return build_vocabulary(t for s in TOY_SENTENCES for t in s)


@pytest.fixture(scope="session")
def toy_corpus(toy_vocab):
    return encode(TOY_SENTENCES, toy_vocab)


@pytest.fixture(scope="session")
def toy_table(toy_corpus, toy_vocab):
    return accumulate_counts(toy_corpus, 2, toy_vocab)


@pytest.fixture(scope="session")
def toy_ids(toy_vocab):
    return {
        "a": toy_vocab.index["a"],
        "b": toy_vocab.index["b"],
        "eos": toy_vocab.eos_id,
        "bos": toy_vocab.bos_id,
    }


@pytest.fixture(scope="session")
def sample_sentences():
    """1,000 synthetic sentences over a small vocabulary."""
    return generate_corpus(1000, seed=99, vocab_size=256)


@pytest.fixture(scope="session")
def sample_vocab(sample_sentences):
    return build_vocabulary((t for s in sample_sentences for t in s),
                            add_unk=True)


@pytest.fixture(scope="session")
def sample_corpus(sample_sentences, sample_vocab):
    return encode(sample_sentences, sample_vocab)


@pytest.fixture(scope="session")
def sample_table(sample_corpus, sample_vocab):
    return accumulate_counts(sample_corpus, 2, sample_vocab)


@pytest.fixture(scope="session")
def sample_table3(sample_corpus, sample_vocab):
    return accumulate_counts(sample_corpus, 3, sample_vocab)
