"""Streaming caption readers for line-oriented corpus files.

Three formats are supported, all one record per ``\\n``-terminated line:

* ``plain-lines``  -- the whole line is the caption
* ``delimited``    -- the line is split on a single-byte delimiter and one
  column is the caption
* ``json-records`` -- the line is a JSON object and one string field is the
  caption

Files are read as bytes and decoded per record; a record that fails UTF-8
decoding, lacks the requested column/field, or is not valid JSON is skipped
and counted, never fatal. If more than half of the records in a file are
malformed the stream raises CorruptCorpusError at exhaustion.

``doc_id`` numbers valid records only, starting at 0, so the final record's
doc_id + 1 equals the valid count regardless of skips.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import CorpusError, CorruptCorpusError

PLAIN_LINES = "plain-lines"
DELIMITED = "delimited"
JSON_RECORDS = "json-records"


@dataclass(frozen=True)
class CaptionRecord:
    doc_id: int
    text: str


@dataclass(frozen=True)
class CorpusFormat:
    """How to pull a caption out of each line of a corpus file."""

    kind: str = PLAIN_LINES
    column: int = 0
    delimiter: str = "\t"
    field: str = "caption"

    def __post_init__(self):
        if self.kind not in (PLAIN_LINES, DELIMITED, JSON_RECORDS):
            raise ValueError(f"unknown corpus format kind: {self.kind!r}")
        if self.kind == DELIMITED:
            if len(self.delimiter.encode("utf-8")) != 1:
                raise ValueError("delimiter must be a single byte")
            if self.column < 0:
                raise ValueError("column index must be >= 0")
        if self.kind == JSON_RECORDS and not self.field:
            raise ValueError("json-records field name must be non-empty")

    @classmethod
    def plain(cls) -> "CorpusFormat":
        return cls(kind=PLAIN_LINES)

    @classmethod
    def delimited(cls, column: int, delimiter: str = "\t") -> "CorpusFormat":
        return cls(kind=DELIMITED, column=column, delimiter=delimiter)

    @classmethod
    def json_records(cls, field: str) -> "CorpusFormat":
        return cls(kind=JSON_RECORDS, field=field)

    @classmethod
    def parse(cls, spec: str) -> "CorpusFormat":
        """Parse a CLI/config format spec.

        Accepted forms: ``plain-lines``, ``delimited:<col>[:<delim>]``,
        ``json-records:<field>``.  The default delimited delimiter is tab.
        """
        parts = spec.split(":")
        kind = parts[0]
        if kind == PLAIN_LINES and len(parts) == 1:
            return cls.plain()
        if kind == DELIMITED and len(parts) in (2, 3):
            delim = parts[2] if len(parts) == 3 else "\t"
            return cls.delimited(int(parts[1]), delim)
        if kind == JSON_RECORDS and len(parts) == 2:
            return cls.json_records(parts[1])
        raise ValueError(f"cannot parse corpus format spec: {spec!r}")

    def spec(self) -> str:
        if self.kind == PLAIN_LINES:
            return PLAIN_LINES
        if self.kind == DELIMITED:
            return f"{DELIMITED}:{self.column}:{self.delimiter}"
        return f"{JSON_RECORDS}:{self.field}"

    def extract(self, raw: bytes) -> str | None:
        """Caption text from one raw line, or None if the line is malformed."""
        if self.kind == PLAIN_LINES:
            try:
                return raw.decode("utf-8")
            except UnicodeDecodeError:
                return None
        if self.kind == DELIMITED:
            parts = raw.split(self.delimiter.encode("utf-8"))
            if self.column >= len(parts):
                return None
            try:
                return parts[self.column].decode("utf-8")
            except UnicodeDecodeError:
                return None
        # json-records
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return None
        if not isinstance(obj, dict):
            return None
        value = obj.get(self.field)
        if not isinstance(value, str):
            return None
        return value


class CorpusStream:
    """Single-consumer iterator over CaptionRecords with skip accounting.

    ``start``/``end`` restrict the stream to the lines whose first byte lies
    in ``[start, end)``; shard boundaries may fall mid-line, so a shard owns
    exactly the lines that start inside it. Shard streams number doc_ids
    locally and defer the corrupt-ratio check to their aggregator.
    """

    def __init__(
        self,
        path: str,
        fmt: CorpusFormat,
        start: int = 0,
        end: int | None = None,
        check_corrupt: bool = True,
    ):
        self.path = path
        self.fmt = fmt
        self.valid = 0
        self.skipped = 0
        self._end = end
        self._check = check_corrupt
        try:
            self._fh = open(path, "rb")
        except OSError as exc:
            raise CorpusError(f"cannot open corpus {path!r}: {exc}") from exc
        if start > 0:
            self._fh.seek(start - 1)
            if self._fh.read(1) != b"\n":
                self._fh.readline()  # partial line; owned by the previous shard

    def __iter__(self):
        return self

    def __next__(self) -> CaptionRecord:
        fh = self._fh
        while True:
            if fh.closed:
                raise StopIteration
            if self._end is not None and fh.tell() >= self._end:
                self._finish()
                raise StopIteration
            raw = fh.readline()
            if not raw:
                self._finish()
                raise StopIteration
            text = self.fmt.extract(_strip_eol(raw))
            if text is None:
                self.skipped += 1
                continue
            record = CaptionRecord(doc_id=self.valid, text=text)
            self.valid += 1
            return record

    def _finish(self):
        self._fh.close()
        if self._check and self.skipped > self.valid:
            raise CorruptCorpusError(
                f"{self.path!r}: {self.skipped} of {self.skipped + self.valid} "
                "records malformed (more than half)"
            )

    def close(self):
        self._fh.close()


def _strip_eol(raw: bytes) -> bytes:
    if raw.endswith(b"\n"):
        raw = raw[:-1]
    if raw.endswith(b"\r"):
        raw = raw[:-1]
    return raw


def open_corpus(path: str, fmt: CorpusFormat) -> CorpusStream:
    """Stream CaptionRecords from ``path`` in file order."""
    return CorpusStream(path, fmt)


def open_corpus_range(
    path: str, fmt: CorpusFormat, start: int, end: int | None
) -> CorpusStream:
    """Stream one byte-range shard of a corpus (no corrupt-ratio check)."""
    return CorpusStream(path, fmt, start=start, end=end, check_corrupt=False)


def shard_byte_ranges(path: str, shards: int) -> list[tuple[int, int]]:
    """Split a file into ``shards`` contiguous byte ranges covering it exactly."""
    size = os.path.getsize(path)
    if shards <= 1 or size == 0:
        return [(0, size)]
    step = size // shards
    bounds = [i * step for i in range(shards)] + [size]
    return [(bounds[i], bounds[i + 1]) for i in range(shards)]


def count_records(path: str, fmt: CorpusFormat) -> tuple[int, int]:
    """Return (valid, skipped) counts for a corpus file."""
    stream = open_corpus(path, fmt)
    for _ in stream:
        pass
    return stream.valid, stream.skipped
