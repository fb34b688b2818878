"""Shared fixtures and synthetic-corpus helpers."""

from __future__ import annotations

import random

import pytest

from comira.concepts import NormalizerConfig, build_vocabulary

# Letters that appear in no lemma-rule suffix (those use s/e/d/i/o/g/n/y/c/h/x/z),
# so synthetic words always lemmatize to themselves and are never stopwords.
_DIGIT_LETTERS = "abfjklmpqr"


def word(i: int) -> str:
    """Deterministic letters-only token: 0 -> 'wa', 13 -> 'wbj', ..."""
    return "w" + "".join(_DIGIT_LETTERS[int(d)] for d in str(i))


def synth_docs(
    num_docs: int,
    vocab_size: int,
    max_words: int,
    seed: int,
    min_words: int = 1,
) -> list[str]:
    """Random space-separated documents over the synthetic word list."""
    rng = random.Random(seed)
    words = [word(i) for i in range(vocab_size)]
    docs = []
    for _ in range(num_docs):
        k = rng.randint(min_words, max_words)
        docs.append(" ".join(rng.choice(words) for _ in range(k)))
    return docs


@pytest.fixture
def config() -> NormalizerConfig:
    return NormalizerConfig()


@pytest.fixture
def tiny_vocab(config):
    """Vocabulary over the 3-document corpus {cat,dog}, {cat}, {dog}."""
    return build_vocabulary(["cat dog", "cat", "dog"], config, 1)


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    return str(path)
