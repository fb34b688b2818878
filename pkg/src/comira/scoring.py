"""Per-example PMI scores for captions and VQA question/answer pairs.

A score is the mean PMI over all unordered pairs of distinct in-vocabulary
concepts in the example ("valid pairs"); examples with fewer than two such
concepts have no defined score and raise UndefinedScoreError so callers can
skip and count them rather than silently biasing downstream bins.
"""

from __future__ import annotations

import json
import math
import string
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .concepts import NormalizerConfig, normalize
from .errors import UndefinedScoreError
from .pmi import PmiModel

_PUNCT_TABLE = str.maketrans({ch: " " for ch in string.punctuation})
_ARTICLES = ("a", "an", "the")


@dataclass
class PmiScore:
    example_id: str
    mean_pmi: float
    pair_count: int
    pairs: list[tuple[str, str, float]] | None = None  # audit trail, optional


@dataclass
class VqaExample:
    example_id: str
    question: str
    human_answers: list[str]
    ground_truth: str | None = None  # derived from human_answers when absent


def normalize_answer(answer: str) -> str:
    """Case-fold, drop punctuation, strip a leading article, collapse spaces."""
    folded = answer.casefold().translate(_PUNCT_TABLE)
    tokens = folded.split()
    if len(tokens) > 1 and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def derive_ground_truth(human_answers: list[str]) -> str:
    """Most frequent normalized answer; ties break lexicographically."""
    if not human_answers:
        raise ValueError("cannot derive a ground truth from no answers")
    counts = Counter(normalize_answer(a) for a in human_answers)
    return min(counts, key=lambda a: (-counts[a], a))


def _scoring_config(model: PmiModel) -> NormalizerConfig:
    config = model.vocab.config
    if config is None:
        raise ValueError(
            "scoring requires a vocabulary with its normalizer config attached"
        )
    return config


def _mean_pairwise(
    example_id: str,
    concept_ids: list[int],
    model: PmiModel,
    keep_pairs: bool,
) -> PmiScore:
    if len(concept_ids) < 2:
        raise UndefinedScoreError(
            f"example {example_id!r} has {len(concept_ids)} in-vocabulary "
            "concepts; at least 2 are needed for a PMI score"
        )
    values = []
    audit = [] if keep_pairs else None
    for a, b in combinations(concept_ids, 2):
        value = model.pmi(a, b)
        values.append(value)
        if audit is not None:
            audit.append((model.vocab.lemma(a), model.vocab.lemma(b), value))
    return PmiScore(
        example_id=example_id,
        mean_pmi=math.fsum(values) / len(values),
        pair_count=len(values),
        pairs=audit,
    )


def _distinct_in_vocab_ids(lemmas: Iterable[str], model: PmiModel) -> list[int]:
    lemma_to_id = model.vocab.lemma_to_id
    seen: set[int] = set()
    out: list[int] = []
    for lem in lemmas:
        cid = lemma_to_id.get(lem)
        if cid is not None and cid not in seen:
            seen.add(cid)
            out.append(cid)
    return out


def caption_mean_pmi(
    text: str,
    model: PmiModel,
    example_id: str = "",
    keep_pairs: bool = False,
) -> PmiScore:
    """Mean PMI over all pairs of distinct in-vocabulary concepts in a caption."""
    config = _scoring_config(model)
    ids = _distinct_in_vocab_ids(normalize(text, config), model)
    return _mean_pairwise(example_id, ids, model, keep_pairs)


def key_pair_pmi(accessory: str, class_concept: str, model: PmiModel) -> float:
    """PMI of the designated accessory/class concept pair (symmetric)."""
    return model.pmi_of_lemmas(accessory, class_concept)


def vqa_example_pmi(
    example: VqaExample,
    model: PmiModel,
    keep_pairs: bool = False,
) -> PmiScore:
    """Mean PMI over concepts drawn from the question and ground-truth answer.

    "yes"/"no" are kept as concepts here: many answers are exactly those
    words, so this extraction bypasses their usual stopword removal.
    """
    config = _scoring_config(model).with_keep_yes_no(True)
    truth = example.ground_truth
    if truth is None:
        truth = derive_ground_truth(example.human_answers)
    lemmas = normalize(example.question, config) + normalize(truth, config)
    ids = _distinct_in_vocab_ids(lemmas, model)
    return _mean_pairwise(example.example_id, ids, model, keep_pairs)


def question_only_pmi(
    example: VqaExample,
    model: PmiModel,
    keep_pairs: bool = False,
) -> PmiScore:
    """Mean PMI over question concepts only, with "yes"/"no" excluded.

    The answer text never affects this score; it isolates the question-side
    co-occurrence signal for yes-bias analysis.
    """
    config = _scoring_config(model).with_keep_yes_no(True)
    lemmas = [
        lem for lem in normalize(example.question, config) if lem not in ("yes", "no")
    ]
    ids = _distinct_in_vocab_ids(lemmas, model)
    return _mean_pairwise(example.example_id, ids, model, keep_pairs)


def write_scores(scores: Iterable[PmiScore], path: str) -> None:
    """One JSON record per line: example_id, mean_pmi, pair_count."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in scores:
            fh.write(
                json.dumps(
                    {
                        "example_id": s.example_id,
                        "mean_pmi": s.mean_pmi,
                        "pair_count": s.pair_count,
                    }
                )
            )
            fh.write("\n")


def read_scores(path: str) -> list[PmiScore]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                PmiScore(
                    example_id=obj["example_id"],
                    mean_pmi=float(obj["mean_pmi"]),
                    pair_count=int(obj["pair_count"]),
                )
            )
    return out
