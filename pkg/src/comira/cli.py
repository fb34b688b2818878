"""Pipeline command-line front-end.

Subcommands cover the full pipeline: build-vocab, count-pairs, pmi-query,
score-captions, score-vqa, select-pairs, filter-accessories, sample-pairs,
gen-prompts, edit-images, eval-report. Every subcommand prints its resolved
configuration (after defaults and config-file merging; flags win) to stderr
before doing any work, logs to stderr only, and is idempotent given
identical inputs and seeds.

Exit codes: 0 success, 2 usage, 3 input error, 4 pipeline (fingerprint)
mismatch, 5 external-service failure. Failures emit one machine-readable
JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import compositing, cooccur, evaluate, pairs as pairs_mod, scoring
from .concepts import (
    NormalizerConfig,
    build_vocabulary,
    lemma_exceptions_from_file,
    lemma_rules_from_file,
    load_vocabulary,
    save_vocabulary,
    stopwords_from_file,
)
from .corpus import CorpusFormat, open_corpus
from .errors import (
    ComiraError,
    FingerprintMismatchError,
    GenerationClientError,
    UndefinedScoreError,
    UnknownConceptError,
)
from .pmi import MODES, PmiModel, SmoothingConfig
from .scoring import VqaExample, derive_ground_truth, normalize_answer

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_MISMATCH = 4
EXIT_SERVICE = 5


def log(message: str) -> None:
    print(message, file=sys.stderr)


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment; keys use hyphens."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


_BOOLS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _cast_bool(raw: str) -> bool:
    try:
        return _BOOLS[raw.lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {raw!r}") from None


class Resolver:
    """Merge flag values, config-file values, and defaults; flags win."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_values = (
            load_config_file(args.config) if getattr(args, "config", None) else {}
        )
        self.resolved: dict[str, object] = {}

    def get(self, key: str, default=None, cast=None):
        value = getattr(self.args, key, None)
        if value is None and key in self.file_values:
            raw = self.file_values[key]
            if cast is bool:
                value = _cast_bool(raw)
            elif cast is not None:
                value = cast(raw)
            else:
                value = raw
        if value is None:
            value = default
        self.resolved[key] = value
        return value

    def announce(self) -> None:
        for key in sorted(self.resolved):
            log(f"config {key}={self.resolved[key]}")


def _normalizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lowercase", action=argparse.BooleanOptionalAction,
                        default=None, help="lowercase text (default: yes)")
    parser.add_argument("--keep-yes-no", action=argparse.BooleanOptionalAction,
                        default=None,
                        help="keep 'yes'/'no' despite the stopword list")
    parser.add_argument("--stopwords", help="stopword list file override")
    parser.add_argument("--lemma-rules", help="lemma suffix-rule table override")
    parser.add_argument("--lemma-exceptions", help="lemma exception table override")


def _resolve_normalizer(res: Resolver) -> NormalizerConfig:
    kwargs: dict = {}
    lowercase = res.get("lowercase", True, cast=bool)
    keep = res.get("keep_yes_no", False, cast=bool)
    kwargs["lowercase"] = lowercase
    kwargs["keep_yes_no"] = keep
    stopwords_path = res.get("stopwords")
    if stopwords_path:
        kwargs["stopwords"] = stopwords_from_file(stopwords_path)
    rules_path = res.get("lemma_rules")
    if rules_path:
        kwargs["lemma_rules"] = lemma_rules_from_file(rules_path)
    exceptions_path = res.get("lemma_exceptions")
    if exceptions_path:
        kwargs["lemma_exceptions"] = lemma_exceptions_from_file(exceptions_path)
    return NormalizerConfig(**kwargs)


def _smoothing_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha-pair", type=float, default=None)
    parser.add_argument("--alpha-single", type=float, default=None)
    parser.add_argument("--normalization-mode", choices=MODES, default=None)


def _resolve_smoothing(res: Resolver) -> SmoothingConfig:
    return SmoothingConfig(
        alpha_pair=res.get("alpha_pair", 1.0, cast=float),
        alpha_single=res.get("alpha_single", 1e4, cast=float),
        normalization_mode=res.get("normalization_mode", "concept-count"),
    )


def _load_model(res: Resolver, config: NormalizerConfig | None = None) -> PmiModel:
    """Load vocab + counts into a model; attaching a config verifies it."""
    vocab_path = res.get("vocab")
    counts_path = res.get("counts")
    if not vocab_path or not counts_path:
        raise ValueError("--vocab and --counts are required")
    smoothing = _resolve_smoothing(res)
    vocab = load_vocabulary(vocab_path, config)
    table = cooccur.load_table(counts_path)
    return PmiModel(vocab=vocab, counts=table, smoothing=smoothing)


def _read_jsonl(path: str):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON record: {exc}") from exc


# -- subcommand handlers ----------------------------------------------------


def cmd_build_vocab(args) -> int:
    res = Resolver(args)
    corpus_path = res.get("corpus")
    fmt = CorpusFormat.parse(res.get("format", "plain-lines"))
    min_doc_freq = res.get("min_doc_freq", 1, cast=int)
    out = res.get("out")
    config = _resolve_normalizer(res)
    res.announce()
    if not corpus_path or not out:
        raise ValueError("--corpus and --out are required")
    stream = open_corpus(corpus_path, fmt)
    vocab = build_vocabulary(stream, config, min_doc_freq)
    save_vocabulary(vocab, out)
    log(
        f"vocabulary: {len(vocab)} concepts over {vocab.num_docs} documents "
        f"({stream.skipped} records skipped) -> {out}"
    )
    return EXIT_OK


def cmd_count_pairs(args) -> int:
    res = Resolver(args)
    corpus_path = res.get("corpus")
    fmt = CorpusFormat.parse(res.get("format", "plain-lines"))
    vocab_path = res.get("vocab")
    out = res.get("out")
    workers = res.get("workers", os.cpu_count() or 1, cast=int)
    per_doc_cap = res.get("per_doc_cap", cooccur.DEFAULT_PER_DOC_CAP, cast=int)
    spill = res.get("spill_threshold", cooccur.DEFAULT_SPILL_THRESHOLD, cast=int)
    config = _resolve_normalizer(res)
    res.announce()
    if not corpus_path or not vocab_path or not out:
        raise ValueError("--corpus, --vocab and --out are required")
    vocab = load_vocabulary(vocab_path, config)  # verifies the fingerprint
    table = cooccur.count_pairs_file(
        corpus_path, fmt, vocab,
        workers=workers, per_doc_cap=per_doc_cap, spill_threshold=spill,
    )
    cooccur.save_table(table, out)
    log(
        f"pair counts: {table.num_pairs()} distinct pairs over "
        f"{table.num_docs} documents -> {out}"
    )
    return EXIT_OK


def cmd_pmi_query(args) -> int:
    res = Resolver(args)
    pairs_path = res.get("pairs")
    out_path = res.get("out")
    model = _load_model(res)
    res.announce()
    if not pairs_path:
        raise ValueError("--pairs is required")
    warnings = 0
    lines_out = []
    with open(pairs_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                lemma1, lemma2 = line.split("\t")
            except ValueError:
                raise ValueError(
                    f"{pairs_path}:{lineno}: expected 'lemma1<TAB>lemma2'"
                ) from None
            try:
                value = f"{model.pmi_of_lemmas(lemma1, lemma2):.12g}"
            except UnknownConceptError:
                value = "NA"
                warnings += 1
            lines_out.append(f"{lemma1}\t{lemma2}\t{value}")
    text = "\n".join(lines_out) + ("\n" if lines_out else "")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if warnings:
        log(f"warning: {warnings} pairs contained unknown lemmas (NA)")
    return EXIT_OK


def cmd_score_captions(args) -> int:
    res = Resolver(args)
    captions_path = res.get("captions")
    fmt = CorpusFormat.parse(res.get("format", "plain-lines"))
    id_field = res.get("id_field")
    out = res.get("out")
    model = _load_model(res, _resolve_normalizer(res))
    res.announce()
    if not captions_path or not out:
        raise ValueError("--captions and --out are required")
    scores = []
    skipped = 0
    if id_field:
        if fmt.kind != "json-records":
            raise ValueError("--id-field requires --format json-records:<field>")
        for obj in _read_jsonl(captions_path):
            text = obj.get(fmt.field)
            example_id = obj.get(id_field)
            if not isinstance(text, str) or example_id is None:
                skipped += 1
                continue
            try:
                scores.append(
                    scoring.caption_mean_pmi(text, model, example_id=str(example_id))
                )
            except UndefinedScoreError:
                skipped += 1
    else:
        for record in open_corpus(captions_path, fmt):
            try:
                scores.append(
                    scoring.caption_mean_pmi(
                        record.text, model, example_id=str(record.doc_id)
                    )
                )
            except UndefinedScoreError:
                skipped += 1
    scoring.write_scores(scores, out)
    log(f"scored {len(scores)} captions ({skipped} undefined/skipped) -> {out}")
    return EXIT_OK


def cmd_score_vqa(args) -> int:
    res = Resolver(args)
    examples_path = res.get("examples")
    question_only = res.get("question_only", False, cast=bool)
    out = res.get("out")
    model = _load_model(res, _resolve_normalizer(res))
    res.announce()
    if not examples_path or not out:
        raise ValueError("--examples and --out are required")
    score_fn = scoring.question_only_pmi if question_only else scoring.vqa_example_pmi
    scores = []
    skipped = 0
    for obj in _read_jsonl(examples_path):
        example = VqaExample(
            example_id=str(obj["example_id"]),
            question=obj.get("question", ""),
            human_answers=list(obj.get("human_answers", [])),
            ground_truth=obj.get("ground_truth"),
        )
        try:
            scores.append(score_fn(example, model))
        except UndefinedScoreError:
            skipped += 1
    scoring.write_scores(scores, out)
    log(f"scored {len(scores)} examples ({skipped} undefined/skipped) -> {out}")
    return EXIT_OK


def cmd_select_pairs(args) -> int:
    res = Resolver(args)
    vocab_path = res.get("vocab")
    classes_path = res.get("classes")
    out = res.get("out")
    config = _resolve_normalizer(res)
    res.announce()
    if not vocab_path or not classes_path or not out:
        raise ValueError("--vocab, --classes and --out are required")
    vocab = load_vocabulary(vocab_path)
    names = []
    ids: dict[str, str] = {}
    with open(classes_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if "\t" in line:
                class_id, name = line.split("\t", 1)
            else:
                class_id, name = None, line
            names.append(name)
            category = pairs_mod.derive_categories([name], config).pop()
            if class_id is not None and category not in ids:
                ids[category] = class_id
    categories = pairs_mod.derive_categories(names, config)
    selected = pairs_mod.select_candidate_pairs(vocab, categories, ids)
    pairs_mod.write_pairs(selected, out)
    log(
        f"selected {len(selected)} candidate pairs "
        f"({len(categories)} categories) -> {out}"
    )
    return EXIT_OK


def cmd_filter_accessories(args) -> int:
    res = Resolver(args)
    pairs_path = res.get("pairs")
    out = res.get("out")
    words_path = res.get("words")
    tagger_path = res.get("tagger")
    client_path = res.get("client")
    retry_path = res.get("retryable")
    res.announce()
    if not pairs_path or not out:
        raise ValueError("--pairs and --out are required")
    candidates = pairs_mod.read_pairs(pairs_path)
    words = frozenset(stopwords_from_file(words_path)) if words_path else None
    tagger = pairs_mod.LexiconTagger.from_file(tagger_path) if tagger_path else None
    client = None
    if client_path:
        client = pairs_mod.HttpGenerationClient(
            pairs_mod.ClientConfig.from_file(client_path)
        )
    kept, stats = pairs_mod.filter_accessories(
        candidates, tagger=tagger, words=words, client=client
    )
    pairs_mod.write_pairs(kept, out)
    log(
        f"accessories: {stats.evaluated} evaluated, {stats.kept} kept "
        f"(digit={stats.dropped_digit} dictionary={stats.dropped_dictionary} "
        f"pos={stats.dropped_pos} literal={stats.dropped_literal} "
        f"visualizability={stats.dropped_visualizability} "
        f"unparseable={stats.dropped_unparseable} "
        f"retryable={len(stats.retryable)})"
    )
    if retry_path:
        with open(retry_path, "w", encoding="utf-8") as fh:
            for word in stats.retryable:
                fh.write(word + "\n")
    return EXIT_OK


def cmd_sample_pairs(args) -> int:
    res = Resolver(args)
    pairs_path = res.get("pairs")
    out = res.get("out")
    target_n = res.get("target_n", cast=int)
    n_strata = res.get("strata", 10, cast=int)
    seed = res.get("seed", 0, cast=int)
    model = _load_model(res)
    res.announce()
    if not pairs_path or not out or target_n is None:
        raise ValueError("--pairs, --target-n and --out are required")
    candidates = pairs_mod.read_pairs(pairs_path)
    for pair in candidates:
        pair.pmi = scoring.key_pair_pmi(pair.accessory, pair.class_concept, model)
    sampled = pairs_mod.stratified_sample(candidates, target_n, n_strata, seed)
    pairs_mod.write_pairs(sampled, out)
    log(f"sampled {len(sampled)} of {len(candidates)} pairs -> {out}")
    return EXIT_OK


def cmd_gen_prompts(args) -> int:
    res = Resolver(args)
    pairs_path = res.get("pairs")
    out = res.get("out")
    client_path = res.get("client")
    max_in_flight = res.get("max_in_flight", 4, cast=int)
    res.announce()
    if not pairs_path or not out:
        raise ValueError("--pairs and --out are required")
    selected = pairs_mod.read_pairs(pairs_path)
    if client_path:
        config = pairs_mod.ClientConfig.from_file(client_path)
        client = pairs_mod.HttpGenerationClient(config)
        jobs = pairs_mod.run_generation_jobs(
            selected, client, max_in_flight=max_in_flight
        )
    else:
        jobs = [pairs_mod.build_generation_job(p) for p in selected]
    with open(out, "w", encoding="utf-8") as fh:
        for job in jobs:
            fh.write(
                json.dumps(
                    {
                        "accessory": job.pair.accessory,
                        "class_concept": job.pair.class_concept,
                        "class_id": job.pair.class_id,
                        "pmi": job.pair.pmi,
                        "caption_prompt": job.caption_prompt,
                        "image_prompt": job.image_prompt,
                        "client_params": job.client_params,
                    }
                )
            )
            fh.write("\n")
    log(f"wrote {len(jobs)} generation jobs -> {out}")
    return EXIT_OK


def _read_index_csv(path: str, key_column: str) -> dict[str, list[str]]:
    index: dict[str, list[str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or key_column not in reader.fieldnames:
            raise ValueError(f"{path}: expected CSV header with '{key_column},path'")
        for row in reader:
            index.setdefault(row[key_column], []).append(row["path"])
    return index


def cmd_edit_images(args) -> int:
    res = Resolver(args)
    pairs_path = res.get("pairs")
    bases_path = res.get("bases")
    accessories_path = res.get("accessories")
    out_dir = res.get("out_dir")
    seed = res.get("seed", 0, cast=int)
    max_area = res.get(
        "max_area_fraction", compositing.DEFAULT_MAX_AREA_FRACTION, cast=float
    )
    bases_per_pair = res.get("bases_per_pair", 1, cast=int)
    white_threshold = res.get(
        "white_threshold", compositing.DEFAULT_WHITE_THRESHOLD, cast=int
    )
    res.announce()
    if not pairs_path or not bases_path or not accessories_path or not out_dir:
        raise ValueError(
            "--pairs, --bases, --accessories and --out-dir are required"
        )
    selected = pairs_mod.read_pairs(pairs_path)
    base_index = _read_index_csv(bases_path, "class_name")
    accessory_rows = _read_index_csv(accessories_path, "accessory")
    accessory_index = {k: v[0] for k, v in accessory_rows.items()}
    result = compositing.build_paste_dataset(
        selected,
        base_index,
        accessory_index,
        seed=seed,
        out_dir=out_dir,
        max_area_fraction=max_area,
        bases_per_pair=bases_per_pair,
        white_threshold=white_threshold,
    )
    log(
        f"edited images: {result.generated} generated, {result.skipped} reused, "
        f"{result.failed} failed -> {result.manifest_path}"
    )
    return EXIT_OK


def cmd_eval_report(args) -> int:
    res = Resolver(args)
    scores_path = res.get("scores")
    preds_path = res.get("preds")
    task = res.get("task")
    num_bins = res.get("bins", evaluate.DEFAULT_NUM_BINS, cast=int)
    tail = res.get("tail", evaluate.DEFAULT_TAIL_FRACTION, cast=float)
    out = res.get("out")
    csv_out = res.get("csv")
    topk = res.get("topk", 1, cast=int)
    vqa_mode = res.get("vqa_mode", "official")
    res.announce()
    if not scores_path or not preds_path or not task or not out:
        raise ValueError("--scores, --preds, --task and --out are required")
    pmi_by_id = {s.example_id: s.mean_pmi for s in scoring.read_scores(scores_path)}
    records = []
    excluded = 0
    for obj in _read_jsonl(preds_path):
        example_id = str(obj["example_id"])
        pmi = pmi_by_id.get(example_id)
        if pmi is None:
            excluded += 1
            continue
        if task == "clf":
            correct = evaluate.topk_correct(obj["ranked"], obj["label"], topk)
            records.append(
                evaluate.EvalRecord(
                    example_id=example_id, pmi=pmi, correctness=float(correct)
                )
            )
        elif task == "vqa":
            records.append(
                evaluate.EvalRecord(
                    example_id=example_id,
                    pmi=pmi,
                    correctness=evaluate.vqa_accuracy(
                        obj["prediction"], obj["human_answers"], mode=vqa_mode
                    ),
                    predicted_answer=obj["prediction"],
                )
            )
        elif task == "vqa-yesno":
            truth = derive_ground_truth(obj["human_answers"])
            if truth != "yes":
                continue
            records.append(
                evaluate.EvalRecord(
                    example_id=example_id,
                    pmi=pmi,
                    correctness=(
                        1.0 if normalize_answer(obj["prediction"]) == "yes" else 0.0
                    ),
                    predicted_answer=obj["prediction"],
                    ground_truth_is_yes=True,
                )
            )
        else:
            raise ValueError(f"unknown task: {task!r}")
    report = evaluate.build_report(
        records, num_bins=num_bins, tail_fraction=tail, excluded=excluded
    )
    evaluate.emit_report(report, out, format="json")
    if csv_out:
        evaluate.emit_report(report, csv_out, format="csv")
    log(
        f"report: {len(records)} records, {excluded} excluded, "
        f"bin r={report.pearson_r}, gap={report.accuracy_gap:.4f} -> {out}"
    )
    return EXIT_OK


# -- parser wiring ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comira",
        description="Concept co-occurrence statistics and PMI evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value config file (flags win)")
        p.set_defaults(func=fn)
        return p

    p = add("build-vocab", cmd_build_vocab,
            "build a frequency-thresholded concept vocabulary")
    p.add_argument("--corpus")
    p.add_argument("--format")
    p.add_argument("--min-doc-freq", type=int)
    p.add_argument("--out")
    _normalizer_flags(p)

    p = add("count-pairs", cmd_count_pairs, "count concept-pair co-occurrences")
    p.add_argument("--corpus")
    p.add_argument("--format")
    p.add_argument("--vocab")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--per-doc-cap", type=int)
    p.add_argument("--spill-threshold", type=int)
    _normalizer_flags(p)

    p = add("pmi-query", cmd_pmi_query, "look up PMI for a file of lemma pairs")
    p.add_argument("--vocab")
    p.add_argument("--counts")
    p.add_argument("--pairs")
    p.add_argument("--out")
    _smoothing_flags(p)

    p = add("score-captions", cmd_score_captions,
            "mean pairwise PMI per caption")
    p.add_argument("--captions")
    p.add_argument("--format")
    p.add_argument("--id-field")
    p.add_argument("--vocab")
    p.add_argument("--counts")
    p.add_argument("--out")
    _normalizer_flags(p)
    _smoothing_flags(p)

    p = add("score-vqa", cmd_score_vqa,
            "example-level PMI for VQA question/answer records")
    p.add_argument("--examples")
    p.add_argument("--vocab")
    p.add_argument("--counts")
    p.add_argument("--out")
    p.add_argument("--question-only", action=argparse.BooleanOptionalAction,
                   default=None)
    _normalizer_flags(p)
    _smoothing_flags(p)

    p = add("select-pairs", cmd_select_pairs,
            "candidate (accessory, class-category) pairs from a vocabulary")
    p.add_argument("--vocab")
    p.add_argument("--classes")
    p.add_argument("--out")
    _normalizer_flags(p)

    p = add("filter-accessories", cmd_filter_accessories,
            "drop accessories failing the filter chain")
    p.add_argument("--pairs")
    p.add_argument("--out")
    p.add_argument("--words")
    p.add_argument("--tagger")
    p.add_argument("--client")
    p.add_argument("--retryable")

    p = add("sample-pairs", cmd_sample_pairs,
            "PMI-stratified subsample of candidate pairs")
    p.add_argument("--pairs")
    p.add_argument("--vocab")
    p.add_argument("--counts")
    p.add_argument("--out")
    p.add_argument("--target-n", type=int)
    p.add_argument("--strata", type=int)
    p.add_argument("--seed", type=int)
    _smoothing_flags(p)

    p = add("gen-prompts", cmd_gen_prompts,
            "render caption prompts (and call the generation endpoint)")
    p.add_argument("--pairs")
    p.add_argument("--out")
    p.add_argument("--client")
    p.add_argument("--max-in-flight", type=int)

    p = add("edit-images", cmd_edit_images,
            "composite accessory images onto base images")
    p.add_argument("--pairs")
    p.add_argument("--bases")
    p.add_argument("--accessories")
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-area-fraction", type=float)
    p.add_argument("--bases-per-pair", type=int)
    p.add_argument("--white-threshold", type=int)

    p = add("eval-report", cmd_eval_report,
            "join predictions with PMI scores into a binned accuracy report")
    p.add_argument("--scores")
    p.add_argument("--preds")
    p.add_argument("--task", choices=["clf", "vqa", "vqa-yesno"])
    p.add_argument("--bins", type=int)
    p.add_argument("--tail", type=float)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--topk", type=int)
    p.add_argument("--vqa-mode", choices=["official", "simple"])

    return parser


def _fail(code: int, exc: BaseException) -> int:
    print(
        json.dumps(
            {"error": {"code": code, "kind": type(exc).__name__, "message": str(exc)}}
        ),
        file=sys.stderr,
    )
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FingerprintMismatchError as exc:
        return _fail(EXIT_MISMATCH, exc)
    except GenerationClientError as exc:
        return _fail(EXIT_SERVICE, exc)
    except (ComiraError, OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_INPUT, exc)


if __name__ == "__main__":
    sys.exit(main())
