"""Concept extraction: tokenize, lemmatize, drop stopwords, build vocabularies.

A *concept* is a single lemmatized non-stopword word. The vocabulary keeps
the concepts whose document frequency (documents containing the lemma at
least once) strictly exceeds a threshold, assigns dense ids in descending
document-frequency order (ties lexicographic), and carries a fingerprint
hashing the normalizer configuration, document count, and lemma set so that
downstream artifacts can detect mismatched pipelines.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable

import re

from . import langdata
from .corpus import CaptionRecord
from .errors import (
    EmptyCorpusError,
    FingerprintMismatchError,
    UnknownConceptError,
    VocabularyFormatError,
)
from .langdata import LemmaRule

DEFAULT_TOKEN_PATTERN = r"[^\W\d_]+"  # contiguous runs of letters

DEFAULT_LEMMA_EXCEPTIONS: tuple[tuple[str, str], ...] = tuple(
    sorted(langdata.LEMMA_EXCEPTIONS.items())
)

VOCAB_MAGIC = "#comira-vocab v1"


@dataclass(frozen=True)
class NormalizerConfig:
    """Deterministic text-normalization settings.

    ``keep_yes_no`` exempts the lemmas "yes" and "no" from stopword removal,
    which VQA concept extraction requires since many answers are exactly
    those words.
    """

    lowercase: bool = True
    token_pattern: str = DEFAULT_TOKEN_PATTERN
    keep_yes_no: bool = False
    stopwords: frozenset[str] = langdata.STOPWORDS
    lemma_rules: tuple[LemmaRule, ...] = langdata.LEMMA_RULES
    lemma_exceptions: tuple[tuple[str, str], ...] = DEFAULT_LEMMA_EXCEPTIONS

    def canonical_json(self) -> str:
        """Stable serialization used for fingerprinting."""
        return json.dumps(
            {
                "lowercase": self.lowercase,
                "token_pattern": self.token_pattern,
                "keep_yes_no": self.keep_yes_no,
                "stopwords": sorted(self.stopwords),
                "lemma_rules": [list(r) for r in self.lemma_rules],
                "lemma_exceptions": [list(p) for p in self.lemma_exceptions],
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    def with_keep_yes_no(self, keep: bool = True) -> "NormalizerConfig":
        return replace(self, keep_yes_no=keep)


def stopwords_from_file(path: str) -> frozenset[str]:
    """One word per line; blank lines and '#' comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip()
            if word:
                words.add(word)
    return frozenset(words)


def lemma_exceptions_from_file(path: str) -> tuple[tuple[str, str], ...]:
    """Tab-separated ``token<TAB>lemma`` lines."""
    pairs = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            token, lemma = line.split("\t")
            pairs[token] = lemma
    return tuple(sorted(pairs.items()))


def lemma_rules_from_file(path: str) -> tuple[LemmaRule, ...]:
    """Ordered rule table: ``suffix<TAB>replacement<TAB>min_stem<TAB>undouble<TAB>blocked``.

    ``replacement`` and ``blocked`` may be empty; ``blocked`` is
    comma-separated; ``undouble`` is 0 or 1.
    """
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            suffix, replacement, min_stem, undouble, blocked = fields
            rules.append(
                LemmaRule(
                    suffix,
                    replacement,
                    int(min_stem),
                    bool(int(undouble)),
                    tuple(b for b in blocked.split(",") if b),
                )
            )
    return tuple(rules)


class Normalizer:
    """Compiled form of a NormalizerConfig; lemma lookups are memoized."""

    def __init__(self, config: NormalizerConfig):
        self.config = config
        self._token_re = re.compile(config.token_pattern)
        stop = set(config.stopwords)
        if config.keep_yes_no:
            stop -= {"yes", "no"}
        self._stopwords = frozenset(stop)
        self._exceptions = dict(config.lemma_exceptions)
        self._rules = config.lemma_rules
        self._memo: dict[str, str] = {}

    def lemma(self, token: str) -> str:
        """Lemmatize one token: exception lookup, then suffix rules to a fixpoint."""
        cached = self._memo.get(token)
        if cached is not None:
            return cached
        result = self._lemma_uncached(token)
        if len(self._memo) < 1_000_000:  # bound memory on adversarial streams
            self._memo[token] = result
        return result

    def _lemma_uncached(self, token: str) -> str:
        current = token
        for _ in range(8):  # rules strictly shorten, so this terminates early
            exception = self._exceptions.get(current)
            if exception is not None:
                return exception
            rewritten = self._apply_rules(current)
            if rewritten == current:
                return current
            current = rewritten
        return current

    def _apply_rules(self, token: str) -> str:
        for suffix, replacement, min_stem, undouble, blocked in self._rules:
            if not token.endswith(suffix):
                continue
            if len(token) - len(suffix) < min_stem:
                continue
            if any(token.endswith(b) for b in blocked):
                continue
            stem = token[: len(token) - len(suffix)] + replacement
            if (
                undouble
                and len(stem) >= 2
                and stem[-1] == stem[-2]
                and stem[-1] not in "lsz"
            ):
                stem = stem[:-1]
            return stem
        return token

    def normalize(self, text: str) -> list[str]:
        """Lemmas of ``text`` in token order, stopwords removed, duplicates kept."""
        if self.config.lowercase:
            text = text.lower()
        out = []
        for token in self._token_re.findall(text):
            lem = self.lemma(token)
            if lem in self._stopwords:
                continue
            out.append(lem)
        return out


@lru_cache(maxsize=16)
def _compiled(config: NormalizerConfig) -> Normalizer:
    return Normalizer(config)


def normalize(text: str, config: NormalizerConfig) -> list[str]:
    """Pure function: lemmas of ``text`` under ``config`` (see Normalizer)."""
    return _compiled(config).normalize(text)


@dataclass
class ConceptVocabulary:
    lemma_to_id: dict[str, int]
    id_to_lemma: list[str]
    doc_freq: list[int]
    num_docs: int
    min_doc_freq: int
    fingerprint: str
    config: NormalizerConfig | None = None
    _verified: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.id_to_lemma)

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.lemma_to_id

    def id(self, lemma: str) -> int:
        try:
            return self.lemma_to_id[lemma]
        except KeyError:
            raise UnknownConceptError(f"not in vocabulary: {lemma!r}") from None

    def lemma(self, concept_id: int) -> str:
        if not 0 <= concept_id < len(self.id_to_lemma):
            raise UnknownConceptError(f"no concept with id {concept_id}")
        return self.id_to_lemma[concept_id]

    def config_matches(self, config: NormalizerConfig) -> bool:
        """Whether ``config`` is the configuration this vocabulary was built with.

        When the build config is attached this is a direct comparison;
        otherwise the fingerprint is recomputed under the candidate config.
        """
        if self.config is not None:
            return config == self.config
        key = config.canonical_json()
        hit = self._verified.get(key)
        if hit is None:
            hit = (
                compute_fingerprint(config, self.num_docs, self.id_to_lemma)
                == self.fingerprint
            )
            self._verified[key] = hit
        return hit


def compute_fingerprint(
    config: NormalizerConfig, num_docs: int, lemmas: Iterable[str]
) -> str:
    digest = hashlib.sha256()
    digest.update(config.canonical_json().encode("utf-8"))
    digest.update(b"\x00")
    digest.update(str(num_docs).encode("ascii"))
    digest.update(b"\x00")
    digest.update("\n".join(sorted(lemmas)).encode("utf-8"))
    return digest.hexdigest()


def build_vocabulary(
    records: Iterable[CaptionRecord | str],
    config: NormalizerConfig,
    min_doc_freq: int,
) -> ConceptVocabulary:
    """Count document frequencies and keep lemmas with doc_freq > min_doc_freq.

    Thresholded words are removed from consideration; no caption is dropped.
    An empty corpus is an error, an empty vocabulary only a warning (callers
    may be probing thresholds).
    """
    if min_doc_freq < 1:
        raise ValueError("min_doc_freq must be >= 1")
    normalizer = _compiled(config)
    freq: Counter[str] = Counter()
    num_docs = 0
    for record in records:
        text = record.text if isinstance(record, CaptionRecord) else record
        num_docs += 1
        freq.update(set(normalizer.normalize(text)))
    if num_docs == 0:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    kept = [(lemma, n) for lemma, n in freq.items() if n > min_doc_freq]
    if not kept:
        warnings.warn(
            f"vocabulary is empty at min_doc_freq={min_doc_freq}", RuntimeWarning
        )
    kept.sort(key=lambda item: (-item[1], item[0]))
    id_to_lemma = [lemma for lemma, _ in kept]
    doc_freq = [n for _, n in kept]
    return ConceptVocabulary(
        lemma_to_id={lemma: i for i, lemma in enumerate(id_to_lemma)},
        id_to_lemma=id_to_lemma,
        doc_freq=doc_freq,
        num_docs=num_docs,
        min_doc_freq=min_doc_freq,
        fingerprint=compute_fingerprint(config, num_docs, id_to_lemma),
        config=config,
    )


def extract_concepts(
    record: CaptionRecord | str,
    config: NormalizerConfig,
    vocab: ConceptVocabulary | None = None,
) -> set:
    """Deduplicated concept set of a caption.

    Without a vocabulary, returns a set of lemmas. With one, returns the set
    of in-vocabulary concept ids and insists that ``config`` matches the
    vocabulary's build configuration.
    """
    text = record.text if isinstance(record, CaptionRecord) else record
    lemmas = normalize(text, config)
    if vocab is None:
        return set(lemmas)
    if not vocab.config_matches(config):
        raise FingerprintMismatchError(
            vocab.fingerprint,
            compute_fingerprint(config, vocab.num_docs, vocab.id_to_lemma),
            context="normalizer config differs from vocabulary build config",
        )
    ids = vocab.lemma_to_id
    return {ids[lem] for lem in lemmas if lem in ids}


def doc_concept_ids(
    text: str,
    normalizer: Normalizer,
    lemma_to_id: dict[str, int],
    cap: int,
) -> list[int]:
    """Distinct in-vocabulary ids in first-occurrence order, truncated at ``cap``.

    This is the extraction used by pair counting; the cap bounds the
    quadratic per-document cost.
    """
    seen: set[int] = set()
    out: list[int] = []
    for lem in normalizer.normalize(text):
        cid = lemma_to_id.get(lem)
        if cid is None or cid in seen:
            continue
        seen.add(cid)
        out.append(cid)
        if len(out) >= cap:
            break
    return out


def save_vocabulary(vocab: ConceptVocabulary, path: str) -> None:
    """Write the vocabulary file: header line, then lemma<TAB>doc_freq in id order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{VOCAB_MAGIC} num_docs={vocab.num_docs} "
            f"min_doc_freq={vocab.min_doc_freq} fingerprint={vocab.fingerprint}\n"
        )
        for lemma, n in zip(vocab.id_to_lemma, vocab.doc_freq):
            fh.write(f"{lemma}\t{n}\n")


_HEADER_RE = re.compile(
    r"^#comira-vocab v1 num_docs=(\d+) min_doc_freq=(\d+) fingerprint=([0-9a-f]{64})$"
)


def load_vocabulary(
    path: str, config: NormalizerConfig | None = None
) -> ConceptVocabulary:
    """Read a vocabulary file back.

    When ``config`` is given, the fingerprint is recomputed and must match;
    this is the stage-boundary check that catches stale or mismatched
    pipeline artifacts.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        match = _HEADER_RE.match(header)
        if not match:
            raise VocabularyFormatError(f"{path!r}: bad vocabulary header: {header!r}")
        num_docs, min_doc_freq, fingerprint = (
            int(match.group(1)),
            int(match.group(2)),
            match.group(3),
        )
        id_to_lemma: list[str] = []
        doc_freq: list[int] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                lemma, count = line.split("\t")
                n = int(count)
            except ValueError:
                raise VocabularyFormatError(
                    f"{path!r}:{lineno}: expected 'lemma<TAB>count', got {line!r}"
                ) from None
            id_to_lemma.append(lemma)
            doc_freq.append(n)
    order = list(zip(doc_freq, id_to_lemma))
    if order != sorted(order, key=lambda item: (-item[0], item[1])):
        raise VocabularyFormatError(
            f"{path!r}: lemmas are not in descending doc_freq order"
        )
    if config is not None:
        expected = compute_fingerprint(config, num_docs, id_to_lemma)
        if expected != fingerprint:
            raise FingerprintMismatchError(
                fingerprint, expected, context=f"vocabulary {path!r}"
            )
    return ConceptVocabulary(
        lemma_to_id={lemma: i for i, lemma in enumerate(id_to_lemma)},
        id_to_lemma=id_to_lemma,
        doc_freq=doc_freq,
        num_docs=num_docs,
        min_doc_freq=min_doc_freq,
        fingerprint=fingerprint,
        config=config,
    )
