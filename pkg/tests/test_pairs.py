import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comira.concepts import NormalizerConfig, build_vocabulary
from comira.errors import GenerationClientError
from comira.pairs import (
    ANSWER_NO,
    ANSWER_UNPARSEABLE,
    ANSWER_YES,
    ClientConfig,
    ConceptPairSpec,
    HttpGenerationClient,
    LexiconTagger,
    build_generation_job,
    derive_categories,
    filter_accessories,
    parse_llm_answer,
    read_pairs,
    render_prompt,
    run_generation_jobs,
    select_candidate_pairs,
    stratified_sample,
    write_pairs,
)

CFG = NormalizerConfig()


# -- categories and candidate pairs -------------------------------------------


def test_derive_categories_last_word_rule():
    cats = derive_categories(
        ["king charles spaniel", "broom", "great white shark"]
    )
    assert cats == {"spaniel", "broom", "shark"}


def test_derive_categories_lemmatizes():
    assert derive_categories(["running shoes"]) == {"shoe"}
    with pytest.raises(ValueError):
        derive_categories([])


def test_select_candidate_pairs_definition():
    docs = ["spaniel broom", "spaniel vase", "broom vase", "spaniel broom vase"]
    vocab = build_vocabulary(docs, CFG, 1)
    pairs = select_candidate_pairs(vocab, {"spaniel"})
    assert {(p.accessory, p.class_concept) for p in pairs} == {
        ("broom", "spaniel"),
        ("vase", "spaniel"),
    }


def test_select_candidate_pairs_excludes_category_category():
    docs = ["spaniel shark broom"] * 3
    vocab = build_vocabulary(docs, CFG, 1)
    pairs = select_candidate_pairs(vocab, {"spaniel", "shark"})
    combos = {(p.accessory, p.class_concept) for p in pairs}
    assert ("shark", "spaniel") not in combos
    assert ("spaniel", "shark") not in combos
    assert combos == {("broom", "spaniel"), ("broom", "shark")}
    for p in pairs:
        assert p.accessory not in {"spaniel", "shark"}


def test_select_candidate_pairs_includes_zero_cooccurrence():
    docs = ["spaniel dog", "spaniel dog", "broom floor", "broom floor"]
    vocab = build_vocabulary(docs, CFG, 1)
    pairs = select_candidate_pairs(vocab, {"spaniel"})
    assert ("broom", "spaniel") in {(p.accessory, p.class_concept) for p in pairs}


def test_select_candidate_pairs_carries_class_ids():
    docs = ["spaniel broom"] * 2
    vocab = build_vocabulary(docs, CFG, 1)
    pairs = select_candidate_pairs(vocab, {"spaniel"}, {"spaniel": "n02086646"})
    assert all(p.class_id == "n02086646" for p in pairs)


def test_select_candidate_pairs_warns_when_empty(tiny_vocab):
    with pytest.warns(RuntimeWarning):
        pairs = select_candidate_pairs(tiny_vocab, {"cat", "dog"})
    assert pairs == []


# -- filtering -----------------------------------------------------------------


def make_pairs(accessories):
    return [ConceptPairSpec(accessory=a, class_concept="spaniel") for a in accessories]


def test_filter_digits_dictionary_pos_literal():
    kept, stats = filter_accessories(
        make_pairs(["b2b", "zzqq", "browse", "photo", "broom", "red"])
    )
    assert {p.accessory for p in kept} == {"broom", "red"}
    assert stats.dropped_digit == 1  # b2b
    assert stats.dropped_dictionary == 1  # zzqq
    assert stats.dropped_pos == 1  # browse tags as verb
    assert stats.dropped_literal == 1  # photo
    assert stats.kept == 2
    assert stats.evaluated == 6


def test_filter_image_is_literal_excluded():
    kept, stats = filter_accessories(make_pairs(["image"]))
    assert kept == []
    assert stats.dropped_literal == 1


class ScriptedClient:
    def __init__(self, script):
        self.script = script
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        word = prompt.rsplit("Q: Is ", 1)[1].split(" easily", 1)[0]
        behavior = self.script[word]
        if behavior == "boom":
            raise GenerationClientError("connection reset")
        return f"Let's think step by step. Something. The answer is {behavior}."


def test_filter_visualizability_stage():
    client = ScriptedClient(
        {"fertilizer": "yes", "temperament": "no", "broom": "maybe"}
    )
    kept, stats = filter_accessories(
        make_pairs(["fertilizer", "temperament", "broom"]), client=client
    )
    assert {p.accessory for p in kept} == {"fertilizer"}
    assert stats.dropped_visualizability == 1
    assert stats.dropped_unparseable == 1
    assert len(client.prompts) == 3
    assert "Is fertilizer easily visualizable?" in client.prompts[0]


def test_filter_transport_failure_is_retryable_not_dropped():
    client = ScriptedClient({"fertilizer": "boom", "broom": "yes"})
    kept, stats = filter_accessories(
        make_pairs(["fertilizer", "broom"]), client=client
    )
    assert {p.accessory for p in kept} == {"broom"}
    assert stats.retryable == ["fertilizer"]
    assert stats.dropped_visualizability == 0


def test_filter_evaluates_each_accessory_once():
    pairs = make_pairs(["broom", "broom", "vase"])
    kept, stats = filter_accessories(pairs)
    assert stats.evaluated == 2
    assert len(kept) == 3  # both broom pairs kept


def test_lexicon_tagger_defaults_and_heuristics():
    tagger = LexiconTagger()
    assert tagger("broom") == "noun"
    assert tagger("red") == "adjective"
    assert tagger("browse") == "verb"
    assert tagger("happiness") == "noun"
    assert tagger("gorgeous") == "adjective"
    assert tagger("znarkly") == "adverb"  # -ly heuristic
    assert tagger("znark") == "noun"  # unknown defaults to noun


# -- llm answer parsing ---------------------------------------------------------


def test_parse_llm_answer_examples():
    assert parse_llm_answer("blah blah. The answer is no.") == ANSWER_NO
    assert parse_llm_answer("The answer is yes") == ANSWER_YES
    assert parse_llm_answer("I think so.") == ANSWER_UNPARSEABLE


def test_parse_llm_answer_last_occurrence_wins():
    text = "The answer is yes. But wait. The answer is no."
    assert parse_llm_answer(text) == ANSWER_NO


def test_parse_llm_answer_case_and_punctuation():
    assert parse_llm_answer("THE ANSWER IS YES!") == ANSWER_YES
    assert parse_llm_answer('the answer is "no".') == ANSWER_NO
    assert parse_llm_answer("The answer is banana.") == ANSWER_UNPARSEABLE
    assert parse_llm_answer("The answer is") == ANSWER_UNPARSEABLE


# -- stratified sampling ----------------------------------------------------------


def pairs_with_pmi(values):
    return [
        ConceptPairSpec(accessory=f"a{i}", class_concept="c", pmi=v)
        for i, v in enumerate(values)
    ]


def test_stratified_uniform_fill():
    pairs = pairs_with_pmi([i / 999 for i in range(1000)])
    sample = stratified_sample(pairs, 100, 10, seed=3)
    assert len(sample) == 100
    assert len({p.accessory for p in sample}) == 100
    by_stratum = [0] * 10
    for p in sample:
        by_stratum[min(int(p.pmi * 10), 9)] += 1
    assert by_stratum == [10] * 10


def test_stratified_shortfall_redistributed():
    # one stratum has only 2 pairs; the rest of its share moves elsewhere
    values = [0.0, 0.01] + [1.0 + i / 100 for i in range(98)]
    pairs = pairs_with_pmi(values)
    sample = stratified_sample(pairs, 50, 2, seed=9)
    assert len(sample) == 50
    low = [p for p in sample if p.pmi < 0.5]
    assert len(low) == 2  # both low-stratum pairs taken, 23 redistributed


def test_stratified_deterministic():
    pairs = pairs_with_pmi([i / 99 for i in range(100)])
    s1 = stratified_sample(pairs, 30, 5, seed=42)
    s2 = stratified_sample(pairs, 30, 5, seed=42)
    s3 = stratified_sample(pairs, 30, 5, seed=43)
    assert [p.accessory for p in s1] == [p.accessory for p in s2]
    assert [p.accessory for p in s1] != [p.accessory for p in s3]


def test_stratified_validation():
    pairs = pairs_with_pmi([0.1, 0.2])
    with pytest.raises(ValueError):
        stratified_sample(pairs, 3, 2, seed=0)
    with pytest.raises(ValueError):
        stratified_sample(pairs, 1, 0, seed=0)
    with pytest.raises(ValueError):
        stratified_sample(make_pairs(["x"]), 1, 1, seed=0)  # pmi unfilled


@given(
    n=st.integers(min_value=1, max_value=60),
    target=st.integers(min_value=0, max_value=60),
    strata=st.integers(min_value=1, max_value=8),
    seed=st.integers(min_value=0, max_value=99),
)
@settings(max_examples=120, deadline=None)
def test_stratified_properties(n, target, strata, seed):
    import random

    rng = random.Random(n * 100 + seed)
    pairs = pairs_with_pmi([rng.uniform(-3, 3) for _ in range(n)])
    if target > n:
        with pytest.raises(ValueError):
            stratified_sample(pairs, target, strata, seed)
        return
    sample = stratified_sample(pairs, target, strata, seed)
    assert len(sample) == target
    assert len({p.accessory for p in sample}) == target  # without replacement
    again = stratified_sample(pairs, target, strata, seed)
    assert [p.accessory for p in sample] == [p.accessory for p in again]


def test_stratified_all_equal_pmi():
    pairs = pairs_with_pmi([1.5] * 20)
    assert len(stratified_sample(pairs, 7, 4, seed=1)) == 7


# -- prompts ---------------------------------------------------------------------


def test_caption_template_exact_substitution():
    text = render_prompt("caption", {"c1": "broom", "c2": "spaniel"})
    assert "the words 'broom' and 'spaniel'" in text
    assert "Make sure both broom and spaniel are the focus of the image." in text


def test_accessory_image_template():
    assert (
        render_prompt("accessory_image", {"c": "vase"})
        == "a vase in the center of a white background"
    )


def test_visualizability_template():
    text = render_prompt("visualizability", {"c": "temperament"})
    assert "Is temperament easily visualizable?" in text
    assert text.rstrip().endswith("Let's think step by step.")
    assert 'conclude your answer with the phrase "The answer is X."' in text


def test_render_prompt_errors():
    with pytest.raises(ValueError):
        render_prompt("caption", {"c1": "broom"})
    with pytest.raises(ValueError):
        render_prompt("nonexistent", {})


def test_build_generation_job_without_client():
    job = build_generation_job(ConceptPairSpec("broom", "spaniel", pmi=0.5))
    assert "broom" in job.caption_prompt and "spaniel" in job.caption_prompt
    assert job.image_prompt == ""
    assert job.client_params == {
        "temperature": 0.1, "min_p": 0.05, "max_new_tokens": 50
    }


class EchoClient:
    def complete(self, prompt):
        return "A broom leaning on a spaniel."


def test_run_generation_jobs_fills_image_prompts():
    pairs = [ConceptPairSpec("broom", "spaniel"), ConceptPairSpec("vase", "spaniel")]
    jobs = run_generation_jobs(pairs, EchoClient(), max_in_flight=2)
    assert all(j.image_prompt == "A broom leaning on a spaniel." for j in jobs)


# -- http client -----------------------------------------------------------------


def test_client_body_and_response_extraction(monkeypatch):
    config = ClientConfig(
        endpoint="http://localhost:9/generate",
        request_template={"prompt": "{prompt}", "model": "anything"},
        response_path="choices.0.text",
        params={"temperature": 0.1},
    )
    client = HttpGenerationClient(config)
    body = client._body("draw a broom")
    assert body == {
        "prompt": "draw a broom", "model": "anything", "temperature": 0.1
    }
    assert client._extract({"choices": [{"text": "ok"}]}) == "ok"
    with pytest.raises(GenerationClientError):
        client._extract({"choices": []})
    with pytest.raises(GenerationClientError):
        client._extract({"choices": [{"text": 42}]})


def test_client_transport_error(monkeypatch):
    import requests

    def explode(*args, **kwargs):
        raise requests.ConnectionError("refused")

    monkeypatch.setattr(requests, "post", explode)
    client = HttpGenerationClient(ClientConfig(endpoint="http://localhost:9/x"))
    with pytest.raises(GenerationClientError):
        client.complete("hello")


def test_client_missing_auth_token(monkeypatch):
    monkeypatch.delenv("COMIRA_TOKEN", raising=False)
    client = HttpGenerationClient(
        ClientConfig(endpoint="http://localhost:9/x", auth_env="COMIRA_TOKEN")
    )
    with pytest.raises(GenerationClientError):
        client.complete("hello")


# -- pair files --------------------------------------------------------------------


def test_pair_file_round_trip(tmp_path):
    pairs = [
        ConceptPairSpec("broom", "spaniel", pmi=-1.25, class_id="n1"),
        ConceptPairSpec("vase", "shark", pmi=None, class_id=None),
    ]
    path = str(tmp_path / "pairs.jsonl")
    write_pairs(pairs, path)
    assert read_pairs(path) == pairs
