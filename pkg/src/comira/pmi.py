"""Smoothed concept probabilities, pairwise PMI, and n-ary specific correlation.

Probabilities are additive-smoothed relative frequencies. Two normalization
modes are provided:

* ``concept-count``: single probabilities divide by the vocabulary size and
  pair probabilities by the number of possible unordered pairs,
* ``document-count``: both divide by the (smoothing-adjusted) document count.

For fixed smoothing of zero, the two modes differ by the corpus-wide
constant ``log(|C|^2 / (C(|C|,2) * |D|))`` for every pair, so orderings and
correlations are identical; the mode only shifts values. PMI uses the
natural logarithm throughout. A zero smoothed numerator yields ``-inf``
rather than an error so degenerate configurations stay observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .concepts import ConceptVocabulary, Normalizer, doc_concept_ids
from .cooccur import PairCountTable
from .corpus import CaptionRecord
from .errors import FingerprintMismatchError, UnknownConceptError

CONCEPT_COUNT = "concept-count"
DOCUMENT_COUNT = "document-count"
MODES = (CONCEPT_COUNT, DOCUMENT_COUNT)

DEFAULT_ALPHA_PAIR = 1.0
DEFAULT_ALPHA_SINGLE = 1e4


@dataclass(frozen=True)
class SmoothingConfig:
    """Additive smoothing counts and the probability normalization mode."""

    alpha_pair: float = DEFAULT_ALPHA_PAIR
    alpha_single: float = DEFAULT_ALPHA_SINGLE
    normalization_mode: str = CONCEPT_COUNT

    def __post_init__(self):
        if self.alpha_pair < 0 or self.alpha_single < 0:
            raise ValueError("smoothing alphas must be >= 0")
        if self.normalization_mode not in MODES:
            raise ValueError(
                f"normalization_mode must be one of {MODES}, "
                f"got {self.normalization_mode!r}"
            )


@dataclass
class PmiModel:
    """Vocabulary + pair counts + smoothing; answers all probability queries.

    Immutable after construction; safe for concurrent readers.
    """

    vocab: ConceptVocabulary
    counts: PairCountTable
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)

    def __post_init__(self):
        if self.vocab.fingerprint != self.counts.vocab_fingerprint:
            raise FingerprintMismatchError(
                self.vocab.fingerprint,
                self.counts.vocab_fingerprint,
                context="vocabulary vs pair-count table",
            )
        if self.vocab.num_docs != self.counts.num_docs:
            raise ValueError(
                "vocabulary and pair-count table disagree on document count: "
                f"{self.vocab.num_docs} vs {self.counts.num_docs}"
            )
        if list(self.vocab.doc_freq) != list(self.counts.single_counts):
            raise ValueError(
                "pair-count table single counts disagree with vocabulary "
                "document frequencies; the table was counted on a different corpus"
            )

    # -- sizes and denominators ------------------------------------------

    @property
    def num_concepts(self) -> int:
        return len(self.vocab)

    @property
    def num_docs(self) -> int:
        return self.vocab.num_docs

    def _joint_denominator(self, n: int, alpha: float) -> float:
        universe = math.comb(self.num_concepts, n)
        if self.smoothing.normalization_mode == CONCEPT_COUNT:
            if universe == 0:
                raise ValueError(
                    f"{n}-way joint probabilities need at least {n} concepts"
                )
            return float(universe)
        return self.num_docs + alpha * universe

    # -- queries ----------------------------------------------------------

    def id_of(self, lemma: str) -> int:
        return self.vocab.id(lemma)

    def _check_id(self, c: int) -> int:
        if not 0 <= c < self.num_concepts:
            raise UnknownConceptError(f"no concept with id {c}")
        return c

    def single_prob(self, c: int) -> float:
        """Smoothed single-concept probability.

        In concept-count mode this is the raw normalization and may exceed 1.
        """
        self._check_id(c)
        alpha = self.smoothing.alpha_single
        numer = self.vocab.doc_freq[c] + alpha
        if self.smoothing.normalization_mode == CONCEPT_COUNT:
            return numer / self.num_concepts
        return numer / (self.num_docs + alpha * self.num_concepts)

    def pair_prob(self, c1: int, c2: int) -> float:
        """Smoothed probability of the unordered concept pair (c1, c2)."""
        self._check_id(c1)
        self._check_id(c2)
        if c1 == c2:
            raise ValueError(f"pair probability needs two distinct concepts, got {c1}")
        alpha = self.smoothing.alpha_pair
        numer = self.counts.count(c1, c2) + alpha
        return numer / self._joint_denominator(2, alpha)

    def pmi(self, c1: int, c2: int) -> float:
        """Pointwise mutual information of (c1, c2) in nats; -inf if numerator 0."""
        pp = self.pair_prob(c1, c2)
        if pp == 0.0:
            return float("-inf")
        return math.log(pp / (self.single_prob(c1) * self.single_prob(c2)))

    def pmi_of_lemmas(self, lemma1: str, lemma2: str) -> float:
        return self.pmi(self.id_of(lemma1), self.id_of(lemma2))

    def specific_correlation(
        self,
        records: Iterable[CaptionRecord | str],
        concepts: Sequence[int],
    ) -> float:
        """n-ary PMI generalization, computed by an on-demand corpus scan.

        ``records`` must be the corpus the pair table was counted from; the
        scan applies the same extraction (including the per-document cap) so
        the n=2 case reduces exactly to ``pmi``. Joint counts are not
        pre-tabulated because the n-way table is combinatorially large.
        """
        n = len(concepts)
        if n < 2:
            raise ValueError("specific correlation needs at least two concepts")
        if len(set(concepts)) != n:
            raise ValueError("concepts must be distinct")
        for c in concepts:
            self._check_id(c)
        if self.vocab.config is None:
            raise ValueError("vocabulary has no attached normalizer config")
        normalizer = Normalizer(self.vocab.config)
        lemma_to_id = self.vocab.lemma_to_id
        cap = self.counts.per_doc_cap
        wanted = frozenset(concepts)
        joint = 0
        for record in records:
            text = record.text if isinstance(record, CaptionRecord) else record
            ids = doc_concept_ids(text, normalizer, lemma_to_id, cap)
            if wanted.issubset(ids):
                joint += 1
        alpha = self.smoothing.alpha_pair
        joint_prob = (joint + alpha) / self._joint_denominator(n, alpha)
        if joint_prob == 0.0:
            return float("-inf")
        product = 1.0
        for c in concepts:
            product *= self.single_prob(c)
        return math.log(joint_prob / product)
