"""Concept-pair dataset construction: selection, filtering, sampling, prompts.

A candidate pair joins one class-category concept (the last word of a class
name, lemmatized) with one non-category "accessory" concept from the same
vocabulary. Pairs that never co-occur are included; only the individual
concepts must be present. Accessories then pass a filter chain -- digits,
dictionary membership, part of speech (nouns and adjectives only), the
literal words "photo"/"image", and optionally an external LLM judging
whether the word can be depicted -- before PMI-stratified subsampling picks
the working set.

Text and image generation happen on opaque external endpoints; this module
only renders prompts, carries default request parameters, and parses the
"The answer is X." convention out of responses.
"""

from __future__ import annotations

import json
import os
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from string import Formatter

import requests

from . import langdata
from .concepts import ConceptVocabulary, Normalizer, NormalizerConfig
from .errors import GenerationClientError

ANSWER_YES = "yes"
ANSWER_NO = "no"
ANSWER_UNPARSEABLE = "unparseable"

PROMPT_TEMPLATES: dict[str, str] = {
    "visualizability": """You will be provided with some examples of questions and answers determining whether a word is easily visualizable, followed by a question for you to solve. An easily visualizable word is a concrete thing or adjective that describes the subject of an image. Abstract concepts that can be represented by concrete objects/images are NOT easily visualizable. When in doubt, answer no. Please think aloud step-by-step and conclude your answer with the phrase "The answer is X.". You must use exactly this phrase, otherwise we will be unable to use your answer.

## Examples

Q: Is temperament easily visualizable?
A: Let's think step by step. Temperament is a property of a person/animal, so the subject of the image would be that person/animal and not "temperament". The answer is no.

Q: Is sb easily visualizable?
A: Let's think step by step. Sb is not a word and is thus not visualizable. The answer is no.

Q: Is fertilizer easily visualizable?
A: Let's think step by step. Fertilizer is a concrete object and can be visualized by, e.g., a bag of fertilizer. The answer is yes.

Q: Is impressionism easily visualizable?
A: Let's think step by step. Impressionism is an art style so images can be rendered in an impressionist style. The answer is yes.

Q: Is browsing easily visualizable?
A: Let's think step by step. Browsing is an action, and actions are not directly visualizable in a static image. The answer is no.

Q: Is success easily visualizable?
A: Let's think step by step. Success is an abstract concept. It could be represented by a trophy or other concrete object, but then that object would be the subject of the image, so it is not directly visualizable. The answer is no.

Q: Is helen easily visualizable?
A: Let's think step by step. Helen is a proper noun, likely referring to a person named Helen, but this would be impossible to know without a text description. Helen is thus not visualizable. The answer is no.

## Your Question
Q: Is {c} easily visualizable?
A: Let's think step by step.""",
    "caption": "Please write a single sentence that could describe an image that contains the words '{c1}' and '{c2}'. Make sure both {c1} and {c2} are the focus of the image.",
    "accessory_image": "a {c} in the center of a white background",
}


@dataclass
class ConceptPairSpec:
    accessory: str
    class_concept: str
    pmi: float | None = None
    class_id: str | None = None


@dataclass(frozen=True)
class TextGenParams:
    temperature: float = 0.1
    min_p: float = 0.05
    max_new_tokens: int = 50


@dataclass(frozen=True)
class ImageGenParams:
    width: int = 512
    height: int = 512
    guidance_scale: float = 5.0
    num_inference_steps: int = 28


@dataclass
class GenerationJob:
    pair: ConceptPairSpec
    caption_prompt: str
    image_prompt: str = ""  # the generated caption, once the client returns it
    client_params: dict = field(default_factory=lambda: asdict(TextGenParams()))


def derive_categories(
    class_names: list[str], config: NormalizerConfig | None = None
) -> set[str]:
    """Category lemma of each class name: its lowercased, lemmatized last word."""
    if not class_names:
        raise ValueError("no class names given")
    normalizer = Normalizer(config or NormalizerConfig())
    out = set()
    for name in class_names:
        tokens = name.strip().lower().split()
        if tokens:
            out.add(normalizer.lemma(tokens[-1]))
    return out


def select_candidate_pairs(
    vocab: ConceptVocabulary,
    categories: set[str],
    category_ids: dict[str, str] | None = None,
) -> list[ConceptPairSpec]:
    """All (accessory, category) pairs over the vocabulary.

    One side must be a category concept and the other must not be; pairs of
    two category words are excluded, and zero-co-occurrence pairs are kept
    (presence of each single concept in the vocabulary is enough).
    """
    if len(vocab) == 0 or not categories:
        raise ValueError("need a non-empty vocabulary and category set")
    in_vocab_cats = sorted(c for c in categories if c in vocab.lemma_to_id)
    accessories = sorted(
        lemma for lemma in vocab.id_to_lemma if lemma not in categories
    )
    ids = category_ids or {}
    pairs = [
        ConceptPairSpec(
            accessory=a, class_concept=c, class_id=ids.get(c)
        )
        for c in in_vocab_cats
        for a in accessories
    ]
    if not pairs:
        warnings.warn("no candidate pairs selected", RuntimeWarning)
    return pairs


def parse_llm_answer(response: str) -> str:
    """Read the yes/no verdict from a "The answer is X." response.

    The last occurrence of the phrase wins (the prompt's examples contain
    earlier ones); anything other than yes/no is "unparseable".
    """
    lowered = response.lower()
    idx = lowered.rfind("the answer is")
    if idx < 0:
        return ANSWER_UNPARSEABLE
    tail = response[idx + len("the answer is") :]
    tokens = tail.split()
    if not tokens:
        return ANSWER_UNPARSEABLE
    word = tokens[0].strip(".,!?:;\"'()[]").casefold()
    if word == "yes":
        return ANSWER_YES
    if word == "no":
        return ANSWER_NO
    return ANSWER_UNPARSEABLE


class LexiconTagger:
    """Part-of-speech tagger backed by a word list plus suffix heuristics.

    Unknown words default to noun, mirroring the usual tagger fallback.
    """

    def __init__(self, lexicon: dict[str, str] | None = None):
        self.lexicon = dict(langdata.POS_LEXICON) if lexicon is None else lexicon

    @classmethod
    def from_file(cls, path: str) -> "LexiconTagger":
        lexicon = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                word, pos = line.split("\t")
                lexicon[word] = pos
        return cls(lexicon)

    def __call__(self, word: str) -> str:
        tag = self.lexicon.get(word)
        if tag is not None:
            return tag
        for suffix, pos in langdata.POS_SUFFIX_HEURISTICS:
            if word.endswith(suffix) and len(word) > len(suffix) + 2:
                return pos
        return "noun"


@dataclass
class FilterStats:
    evaluated: int = 0
    dropped_digit: int = 0
    dropped_dictionary: int = 0
    dropped_pos: int = 0
    dropped_literal: int = 0
    dropped_visualizability: int = 0
    dropped_unparseable: int = 0
    retryable: list[str] = field(default_factory=list)
    kept: int = 0


def filter_accessories(
    candidates: list[ConceptPairSpec],
    tagger: LexiconTagger | None = None,
    words: frozenset[str] | None = None,
    client: "GenerationClient | None" = None,
) -> tuple[list[ConceptPairSpec], FilterStats]:
    """Drop pairs whose accessory fails the filter chain.

    Stages run in order: numeric digits, dictionary membership (the shipped
    word list standing in for a lexical database), part of speech (keep
    nouns and adjectives), the literal words "photo"/"image", and -- when a
    client is configured -- the visualizability prompt. A transport failure
    marks the accessory retryable instead of dropping it permanently;
    retryable accessories are withheld from the kept output and listed in
    the stats so a later run can finish the job.
    """
    tagger = tagger or LexiconTagger()
    words = langdata.ENGLISH_WORDS if words is None else words
    stats = FilterStats()
    verdict: dict[str, bool] = {}
    for pair in candidates:
        word = pair.accessory
        if word in verdict:
            continue
        stats.evaluated += 1
        if any(ch.isdigit() for ch in word):
            stats.dropped_digit += 1
            verdict[word] = False
        elif word not in words:
            stats.dropped_dictionary += 1
            verdict[word] = False
        elif tagger(word) not in ("noun", "adjective"):
            stats.dropped_pos += 1
            verdict[word] = False
        elif word in ("photo", "image"):
            stats.dropped_literal += 1
            verdict[word] = False
        elif client is not None:
            prompt = render_prompt("visualizability", {"c": word})
            try:
                answer = parse_llm_answer(client.complete(prompt))
            except GenerationClientError:
                stats.retryable.append(word)
                verdict[word] = False
                continue
            if answer == ANSWER_YES:
                verdict[word] = True
            elif answer == ANSWER_NO:
                stats.dropped_visualizability += 1
                verdict[word] = False
            else:
                stats.dropped_unparseable += 1
                verdict[word] = False
        else:
            verdict[word] = True
    kept = [p for p in candidates if verdict[p.accessory]]
    stats.kept = len({p.accessory for p in kept})
    return kept, stats


def stratified_sample(
    pairs: list[ConceptPairSpec],
    target_n: int,
    n_strata: int,
    seed: int,
) -> list[ConceptPairSpec]:
    """Sample pairs across the PMI range.

    The PMI range splits into equal-width strata; each contributes
    ``target_n // n_strata`` pairs drawn uniformly without replacement.
    Shortfall from sparse strata (and any remainder) is redistributed one
    slot at a time to whichever strata have the most undrawn pairs left.
    Deterministic given identical inputs and seed.
    """
    if target_n > len(pairs):
        raise ValueError(f"cannot sample {target_n} from {len(pairs)} pairs")
    if n_strata < 1:
        raise ValueError("n_strata must be >= 1")
    if any(p.pmi is None for p in pairs):
        raise ValueError("all pairs must have pmi filled before sampling")
    if target_n == 0:
        return []
    lo = min(p.pmi for p in pairs)
    hi = max(p.pmi for p in pairs)
    width = (hi - lo) / n_strata
    strata: list[list[ConceptPairSpec]] = [[] for _ in range(n_strata)]
    for p in pairs:
        idx = 0 if width == 0.0 else min(int((p.pmi - lo) / width), n_strata - 1)
        strata[idx].append(p)
    rng = random.Random(seed)
    shuffled = [rng.sample(s, len(s)) for s in strata]
    base = target_n // n_strata
    taken = [min(base, len(s)) for s in shuffled]
    deficit = target_n - sum(taken)
    while deficit > 0:
        order = sorted(
            range(n_strata), key=lambda i: (-(len(shuffled[i]) - taken[i]), i)
        )
        progressed = False
        for i in order:
            if deficit == 0:
                break
            if taken[i] < len(shuffled[i]):
                taken[i] += 1
                deficit -= 1
                progressed = True
        if not progressed:  # unreachable while target_n <= len(pairs)
            raise RuntimeError("stratified sampling failed to fill the target")
    out: list[ConceptPairSpec] = []
    for i, s in enumerate(shuffled):
        out.extend(s[: taken[i]])
    return out


def render_prompt(template_id: str, slots: dict[str, str]) -> str:
    """Byte-exact substitution into a shipped prompt template."""
    try:
        template = PROMPT_TEMPLATES[template_id]
    except KeyError:
        raise ValueError(f"unknown prompt template: {template_id!r}") from None
    required = {
        name for _, name, _, _ in Formatter().parse(template) if name is not None
    }
    missing = required - slots.keys()
    if missing:
        raise ValueError(
            f"template {template_id!r} missing slots: {sorted(missing)}"
        )
    return template.format(**slots)


def build_generation_job(
    pair: ConceptPairSpec,
    client: "GenerationClient | None" = None,
    params: TextGenParams = TextGenParams(),
) -> GenerationJob:
    """Render the caption prompt for a pair; run it if a client is configured."""
    prompt = render_prompt(
        "caption", {"c1": pair.accessory, "c2": pair.class_concept}
    )
    job = GenerationJob(pair=pair, caption_prompt=prompt, client_params=asdict(params))
    if client is not None:
        job.image_prompt = client.complete(prompt)
    return job


# -- external generation client -------------------------------------------


@dataclass
class ClientConfig:
    """How to talk to an opaque text/image generation endpoint.

    ``request_template`` is a JSON object whose string values may contain
    the literal placeholder ``{prompt}``; ``params`` is merged on top.
    ``response_path`` walks the response JSON with dot-separated keys and
    list indices, e.g. ``choices.0.text``.
    """

    endpoint: str
    auth_env: str | None = None
    request_template: dict = field(default_factory=lambda: {"prompt": "{prompt}"})
    response_path: str = "text"
    params: dict = field(default_factory=lambda: asdict(TextGenParams()))
    timeout: float = 60.0
    max_in_flight: int = 4

    @classmethod
    def from_file(cls, path: str) -> "ClientConfig":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return cls(**obj)


class GenerationClient:
    """Interface: complete(prompt) -> response text. See HttpGenerationClient."""

    def complete(self, prompt: str) -> str:  # pragma: no cover - interface
        raise NotImplementedError


class HttpGenerationClient(GenerationClient):
    def __init__(self, config: ClientConfig):
        self.config = config

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_env:
            token = os.environ.get(self.config.auth_env)
            if not token:
                raise GenerationClientError(
                    f"auth token variable {self.config.auth_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _body(self, prompt: str) -> dict:
        body = {}
        for key, value in self.config.request_template.items():
            if isinstance(value, str):
                value = value.replace("{prompt}", prompt)
            body[key] = value
        body.update(self.config.params)
        return body

    def complete(self, prompt: str) -> str:
        try:
            resp = requests.post(
                self.config.endpoint,
                json=self._body(prompt),
                headers=self._headers(),
                timeout=self.config.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise GenerationClientError(f"generation request failed: {exc}") from exc
        except ValueError as exc:
            raise GenerationClientError(f"non-JSON response: {exc}") from exc
        return self._extract(payload)

    def _extract(self, payload) -> str:
        node = payload
        for part in self.config.response_path.split("."):
            try:
                node = node[int(part)] if part.isdigit() else node[part]
            except (KeyError, IndexError, TypeError) as exc:
                raise GenerationClientError(
                    f"response path {self.config.response_path!r} not found"
                ) from exc
        if not isinstance(node, str):
            raise GenerationClientError(
                f"response path {self.config.response_path!r} is not text"
            )
        return node


def run_generation_jobs(
    pairs: list[ConceptPairSpec],
    client: GenerationClient,
    params: TextGenParams = TextGenParams(),
    max_in_flight: int = 4,
) -> list[GenerationJob]:
    """Render and complete caption prompts with bounded concurrent requests."""
    jobs = [
        GenerationJob(
            pair=p,
            caption_prompt=render_prompt(
                "caption", {"c1": p.accessory, "c2": p.class_concept}
            ),
            client_params=asdict(params),
        )
        for p in pairs
    ]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        texts = list(pool.map(lambda j: client.complete(j.caption_prompt), jobs))
    for job, text in zip(jobs, texts):
        job.image_prompt = text
    return jobs


# -- pair file round-trip ---------------------------------------------------


def write_pairs(pairs: list[ConceptPairSpec], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps(asdict(p)))
            fh.write("\n")


def read_pairs(path: str) -> list[ConceptPairSpec]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ConceptPairSpec(**json.loads(line)))
    return out
