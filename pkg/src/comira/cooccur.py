"""Concept-pair co-occurrence counting with mergeable shards.

Counts, for every unordered pair of in-vocabulary concepts, the number of
documents whose deduplicated concept set contains both. Pairs are stored
under a packed 64-bit key ``(id_lo << 32) | id_hi`` with ``id_lo < id_hi``
in an ordinary dict (open-addressed hashing); zero-count pairs are
queryable but never stored. Documents with more than ``per_doc_cap``
in-vocabulary concepts are truncated in first-occurrence order to bound the
quadratic per-document cost.

When a counting shard exceeds ``spill_threshold`` distinct pairs, it spills
sorted runs of (key, count) to disk and merge-reduces them at the end, so
worker memory stays bounded even on adversarial corpora.

On-disk format (little-endian), checksummed with the first 8 bytes of the
SHA-256 of everything that precedes it:

    magic "CMR1" | u16 version=1 | u8 flags | 32-byte fingerprint |
    u64 num_docs | u32 vocab_size | u32 per_doc_cap |
    u64 single_counts[vocab_size] | u64 num_entries |
    entries (u32 id_lo, u32 id_hi, u64 count) ascending by (id_lo, id_hi) |
    8-byte checksum
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import multiprocessing as mp
import os
import struct
import sys
import tempfile
from array import array
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .concepts import ConceptVocabulary, Normalizer, doc_concept_ids
from .corpus import CaptionRecord, CorpusFormat, CorpusStream, shard_byte_ranges
from .errors import (
    CorruptCorpusError,
    EmptyCorpusError,
    FingerprintMismatchError,
    TableFormatError,
)

MAGIC = b"CMR1"
VERSION = 1
DEFAULT_PER_DOC_CAP = 256
DEFAULT_SPILL_THRESHOLD = 1 << 23  # distinct pairs held in memory per shard

_HEADER = struct.Struct("<4sHB32sQII")
_ENTRY = struct.Struct("<QQ")  # spill-run record: packed key, count


def pack_pair(a: int, b: int) -> int:
    """Canonical 64-bit key for an unordered id pair."""
    if a == b:
        raise ValueError(f"a concept does not pair with itself: {a}")
    if a > b:
        a, b = b, a
    return (a << 32) | b


def unpack_key(key: int) -> tuple[int, int]:
    return key >> 32, key & 0xFFFFFFFF


@dataclass
class PairCountTable:
    """Sparse unordered-pair document co-occurrence counts plus totals."""

    vocab_fingerprint: str
    num_docs: int
    vocab_size: int
    per_doc_cap: int
    single_counts: list[int]
    pair_counts: dict[int, int] = field(default_factory=dict)

    def count(self, a: int, b: int) -> int:
        """Co-occurrence count for the unordered pair (a, b); 0 if unstored."""
        return self.pair_counts.get(pack_pair(a, b), 0)

    def single(self, a: int) -> int:
        return self.single_counts[a]

    def num_pairs(self) -> int:
        return len(self.pair_counts)


class _Accumulator:
    """Counting state for one shard, with optional spilling to sorted runs."""

    def __init__(self, spill_threshold: int | None):
        self.singles: Counter[int] = Counter()
        self.pairs: Counter[int] = Counter()
        self.spill_threshold = spill_threshold
        self.runs: list[str] = []
        self.valid = 0
        self.skipped = 0

    def add_doc(self, ids: list[int]) -> None:
        self.valid += 1
        if not ids:
            return
        self.singles.update(ids)
        if len(ids) < 2:
            return
        ids = sorted(ids)
        self.pairs.update(
            (a << 32) | b for a, b in itertools.combinations(ids, 2)
        )
        if self.spill_threshold and len(self.pairs) >= self.spill_threshold:
            self._spill()

    def _spill(self) -> None:
        fd, path = tempfile.mkstemp(prefix="comira-run-", suffix=".bin")
        with os.fdopen(fd, "wb") as fh:
            for key in sorted(self.pairs):
                fh.write(_ENTRY.pack(key, self.pairs[key]))
        self.runs.append(path)
        self.pairs.clear()

    def finalize(self) -> dict[int, int]:
        """Merge in-memory counts with any spilled runs into one dict."""
        if not self.runs:
            return dict(self.pairs)
        streams = [_iter_run(path) for path in self.runs]
        streams.append(iter(sorted(self.pairs.items())))
        merged: dict[int, int] = {}
        for key, n in heapq.merge(*streams):
            if key in merged:
                merged[key] += n
            else:
                merged[key] = n
        for path in self.runs:
            os.unlink(path)
        self.runs = []
        self.pairs = Counter()
        return merged


def _iter_run(path: str) -> Iterator[tuple[int, int]]:
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(_ENTRY.size)
            if not chunk:
                return
            yield _ENTRY.unpack(chunk)


def count_pairs(
    records: Iterable[CaptionRecord | str],
    vocab: ConceptVocabulary,
    per_doc_cap: int = DEFAULT_PER_DOC_CAP,
    spill_threshold: int | None = DEFAULT_SPILL_THRESHOLD,
) -> PairCountTable:
    """Count pair co-occurrences over an in-memory record stream (serial)."""
    if len(vocab) == 0:
        raise ValueError("cannot count pairs with an empty vocabulary")
    if vocab.config is None:
        raise ValueError("vocabulary has no attached normalizer config")
    normalizer = Normalizer(vocab.config)
    lemma_to_id = vocab.lemma_to_id
    acc = _Accumulator(spill_threshold)
    for record in records:
        text = record.text if isinstance(record, CaptionRecord) else record
        acc.add_doc(doc_concept_ids(text, normalizer, lemma_to_id, per_doc_cap))
    if acc.valid == 0:
        raise EmptyCorpusError("cannot count pairs over an empty corpus")
    return _assemble(vocab, acc.valid, per_doc_cap, acc.singles, acc.finalize())


def _assemble(
    vocab: ConceptVocabulary,
    num_docs: int,
    per_doc_cap: int,
    singles: Counter,
    pairs: dict[int, int],
) -> PairCountTable:
    single_counts = [0] * len(vocab)
    for cid, n in singles.items():
        single_counts[cid] = n
    return PairCountTable(
        vocab_fingerprint=vocab.fingerprint,
        num_docs=num_docs,
        vocab_size=len(vocab),
        per_doc_cap=per_doc_cap,
        single_counts=single_counts,
        pair_counts=pairs,
    )


# Worker-side state for file counting, installed by the pool initializer.
_WORKER: dict = {}


def _init_worker(path, fmt, lemma_to_id, config, per_doc_cap, spill_threshold):
    _WORKER["path"] = path
    _WORKER["fmt"] = fmt
    _WORKER["lemma_to_id"] = lemma_to_id
    _WORKER["normalizer"] = Normalizer(config)
    _WORKER["cap"] = per_doc_cap
    _WORKER["spill"] = spill_threshold


def _count_shard(byte_range: tuple[int, int]):
    start, end = byte_range
    stream = CorpusStream(
        _WORKER["path"], _WORKER["fmt"], start=start, end=end, check_corrupt=False
    )
    acc = _Accumulator(_WORKER["spill"])
    normalizer = _WORKER["normalizer"]
    lemma_to_id = _WORKER["lemma_to_id"]
    cap = _WORKER["cap"]
    for record in stream:
        acc.add_doc(doc_concept_ids(record.text, normalizer, lemma_to_id, cap))
    return stream.valid, stream.skipped, dict(acc.singles), acc.finalize()


def count_pairs_file(
    path: str,
    fmt: CorpusFormat,
    vocab: ConceptVocabulary,
    workers: int | None = None,
    per_doc_cap: int = DEFAULT_PER_DOC_CAP,
    spill_threshold: int | None = DEFAULT_SPILL_THRESHOLD,
) -> PairCountTable:
    """Count pair co-occurrences over a corpus file, sharded across processes.

    The result is identical for any worker count: shards partition the file
    by byte ranges at line boundaries and counts are pure sums.
    """
    if len(vocab) == 0:
        raise ValueError("cannot count pairs with an empty vocabulary")
    if vocab.config is None:
        raise ValueError("vocabulary has no attached normalizer config")
    if workers is None:
        workers = os.cpu_count() or 1
    ranges = shard_byte_ranges(path, workers)
    initargs = (
        path, fmt, vocab.lemma_to_id, vocab.config, per_doc_cap, spill_threshold,
    )
    if len(ranges) == 1:
        _init_worker(*initargs)
        results = [_count_shard(ranges[0])]
    else:
        ctx = mp.get_context("fork" if sys.platform.startswith("linux") else None)
        with ctx.Pool(
            processes=min(workers, len(ranges)),
            initializer=_init_worker,
            initargs=initargs,
        ) as pool:
            results = pool.map(_count_shard, ranges)
    valid = sum(r[0] for r in results)
    skipped = sum(r[1] for r in results)
    if skipped > valid:
        raise CorruptCorpusError(
            f"{path!r}: {skipped} of {skipped + valid} records malformed"
        )
    if valid == 0:
        raise EmptyCorpusError("cannot count pairs over an empty corpus")
    singles: Counter[int] = Counter()
    pairs: Counter[int] = Counter()
    for _, _, shard_singles, shard_pairs in results:
        singles.update(shard_singles)
        pairs.update(shard_pairs)
    return _assemble(vocab, valid, per_doc_cap, singles, dict(pairs))


def merge(tables: list[PairCountTable]) -> PairCountTable:
    """Sum shard tables. Associative and commutative; fingerprints must agree."""
    if not tables:
        raise ValueError("merge requires at least one table")
    first = tables[0]
    for t in tables[1:]:
        if t.vocab_fingerprint != first.vocab_fingerprint:
            raise FingerprintMismatchError(
                first.vocab_fingerprint, t.vocab_fingerprint, context="merge"
            )
        if t.vocab_size != first.vocab_size:
            raise ValueError("cannot merge tables with different vocab sizes")
        if t.per_doc_cap != first.per_doc_cap:
            raise ValueError("cannot merge tables with different per-doc caps")
    singles = [0] * first.vocab_size
    pairs: Counter[int] = Counter()
    num_docs = 0
    for t in tables:
        num_docs += t.num_docs
        for i, n in enumerate(t.single_counts):
            singles[i] += n
        pairs.update(t.pair_counts)
    return PairCountTable(
        vocab_fingerprint=first.vocab_fingerprint,
        num_docs=num_docs,
        vocab_size=first.vocab_size,
        per_doc_cap=first.per_doc_cap,
        single_counts=singles,
        pair_counts=dict(pairs),
    )


def _u64_bytes(values: Iterable[int]) -> bytes:
    arr = array("Q", values)
    if sys.byteorder == "big":
        arr.byteswap()
    return arr.tobytes()


def save_table(table: PairCountTable, path: str) -> None:
    """Serialize a table; load(save(t)) == t and the bytes are reproducible."""
    digest = hashlib.sha256()
    with open(path, "wb") as fh:

        def put(data: bytes) -> None:
            digest.update(data)
            fh.write(data)

        put(
            _HEADER.pack(
                MAGIC,
                VERSION,
                0,
                bytes.fromhex(table.vocab_fingerprint),
                table.num_docs,
                table.vocab_size,
                table.per_doc_cap,
            )
        )
        put(_u64_bytes(table.single_counts))
        put(struct.pack("<Q", len(table.pair_counts)))
        keys = np.fromiter(
            table.pair_counts.keys(), dtype=np.uint64, count=len(table.pair_counts)
        )
        keys.sort()
        entries = np.empty(
            len(keys), dtype=[("lo", "<u4"), ("hi", "<u4"), ("count", "<u8")]
        )
        entries["lo"] = (keys >> np.uint64(32)).astype(np.uint32)
        entries["hi"] = (keys & np.uint64(0xFFFFFFFF)).astype(np.uint32)
        entries["count"] = np.fromiter(
            (table.pair_counts[int(k)] for k in keys), dtype=np.uint64, count=len(keys)
        )
        put(entries.tobytes())
        fh.write(digest.digest()[:8])


def load_table(path: str) -> PairCountTable:
    """Read a table back, rejecting truncated, corrupted, or inconsistent files."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise TableFormatError(f"cannot read table {path!r}: {exc}") from exc
    if len(blob) < _HEADER.size + 8 + 8:
        raise TableFormatError(f"{path!r}: file too short to be a pair-count table")
    body, checksum = blob[:-8], blob[-8:]
    if hashlib.sha256(body).digest()[:8] != checksum:
        raise TableFormatError(f"{path!r}: checksum mismatch (corrupt or truncated)")
    magic, version, _flags, fp_bytes, num_docs, vocab_size, per_doc_cap = (
        _HEADER.unpack_from(body, 0)
    )
    if magic != MAGIC:
        raise TableFormatError(f"{path!r}: bad magic {magic!r}")
    if version != VERSION:
        raise TableFormatError(f"{path!r}: unsupported version {version}")
    offset = _HEADER.size
    singles_end = offset + 8 * vocab_size
    if singles_end + 8 > len(body):
        raise TableFormatError(f"{path!r}: truncated single-count array")
    singles = np.frombuffer(body, dtype="<u8", count=vocab_size, offset=offset)
    (num_entries,) = struct.unpack_from("<Q", body, singles_end)
    entries_off = singles_end + 8
    expected_len = entries_off + 16 * num_entries
    if expected_len != len(body):
        raise TableFormatError(
            f"{path!r}: entry section length mismatch "
            f"(expected {expected_len}, have {len(body)})"
        )
    entries = np.frombuffer(
        body,
        dtype=[("lo", "<u4"), ("hi", "<u4"), ("count", "<u8")],
        count=num_entries,
        offset=entries_off,
    )
    lo = entries["lo"].astype(np.uint64)
    hi = entries["hi"].astype(np.uint64)
    if np.any(entries["lo"] >= entries["hi"]):
        raise TableFormatError(f"{path!r}: entry with id_lo >= id_hi")
    if np.any(entries["hi"] >= vocab_size):
        raise TableFormatError(f"{path!r}: concept id out of range")
    keys = (lo << np.uint64(32)) | hi
    if len(keys) > 1 and np.any(keys[1:] <= keys[:-1]):
        raise TableFormatError(f"{path!r}: entries not strictly ascending")
    single_list = [int(x) for x in singles]
    counts = entries["count"]
    mins = np.minimum(singles[entries["lo"]], singles[entries["hi"]])
    if np.any(counts > mins) or np.any(counts > num_docs):
        raise TableFormatError(f"{path!r}: pair count exceeds its single counts")
    return PairCountTable(
        vocab_fingerprint=fp_bytes.hex(),
        num_docs=num_docs,
        vocab_size=vocab_size,
        per_doc_cap=per_doc_cap,
        single_counts=single_list,
        pair_counts=dict(zip(keys.tolist(), counts.tolist())),
    )
