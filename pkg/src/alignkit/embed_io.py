"""Readers and writers for the toolkit's on-disk formats.

Three formats live here: the TAEM binary embedding dump, Pharaoh-style
alignment text, and tab-separated BIO tag files.  All parsers reject
malformed input instead of repairing it, and error messages name the byte
offset (TAEM) or line number (text formats) of the problem.

TAEM layout, all integers little-endian::

    file   = magic "TAEM" + version u32 (=1) + record*
    record = sentence_id u64
           + subword_count u32
           + dim u32
           + flags u32              (bit 0: word strings present)
           + word_ids  u32 * subword_count
           + embeddings f32 * subword_count * dim   (row-major)
           + [words: word_count u32 + word_count * (len u32 + UTF-8 bytes)]
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, TextIO

import numpy as np

MAGIC = b"TAEM"
VERSION = 1

_FLAG_WORDS = 1
_U32_MAX = 2**32 - 1
_U64_MAX = 2**64 - 1


class FormatError(ValueError):
    """Malformed file content; the message carries a byte offset or line number."""


@dataclass(eq=False)
class EmbeddingRecord:
    """One sentence's subword embedding matrix plus its subword-to-word map.

    ``embeddings`` is a ``(subword_count, dim)`` float32 matrix.
    ``word_ids[k]`` is the word index of subword ``k``; the sequence must be
    non-decreasing, start at 0, and skip no word index.  ``words``
    optionally carries the word strings, exactly ``max(word_ids) + 1`` of
    them.
    """

    sentence_id: int
    embeddings: np.ndarray
    word_ids: list[int]
    words: list[str] | None = None

    def __post_init__(self) -> None:
        self.embeddings = np.asarray(self.embeddings, dtype=np.float32)
        self.word_ids = [int(w) for w in self.word_ids]
        self.validate()

    @property
    def subword_count(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @property
    def word_count(self) -> int:
        return self.word_ids[-1] + 1

    def validate(self) -> None:
        """Check every record invariant, raising ValueError on the first violation."""
        rid = self.sentence_id
        if not 0 <= int(rid) <= _U64_MAX:
            raise ValueError(f"record {rid}: sentence_id out of u64 range")
        if self.embeddings.ndim != 2:
            raise ValueError(f"record {rid}: embeddings must be 2-dimensional")
        n, d = self.embeddings.shape
        if n < 1 or d < 1:
            raise ValueError(f"record {rid}: empty embedding matrix ({n}x{d})")
        if n > _U32_MAX or d > _U32_MAX:
            raise ValueError(f"record {rid}: matrix shape exceeds u32 range")
        if not np.isfinite(self.embeddings).all():
            raise ValueError(f"record {rid}: non-finite embedding value")
        if len(self.word_ids) != n:
            raise ValueError(
                f"record {rid}: {len(self.word_ids)} word_ids for {n} subwords"
            )
        if self.word_ids[0] != 0:
            raise ValueError(f"record {rid}: word_ids must start at 0")
        for prev, cur in zip(self.word_ids, self.word_ids[1:]):
            if cur < prev or cur > prev + 1:
                raise ValueError(
                    f"record {rid}: word_ids must be non-decreasing without gaps"
                )
        if self.word_ids[-1] > _U32_MAX:
            raise ValueError(f"record {rid}: word id exceeds u32 range")
        if self.words is not None and len(self.words) != self.word_count:
            raise ValueError(
                f"record {rid}: {len(self.words)} word strings for "
                f"{self.word_count} words"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.sentence_id == other.sentence_id
            and self.word_ids == other.word_ids
            and self.words == other.words
            and self.embeddings.shape == other.embeddings.shape
            and self.embeddings.tobytes() == other.embeddings.tobytes()
        )


def _as_binary_sink(destination: BinaryIO | str | Path) -> tuple[BinaryIO, bool]:
    if hasattr(destination, "write"):
        return destination, False
    return open(destination, "wb"), True


def write_embeddings(
    records: Iterable[EmbeddingRecord], destination: BinaryIO | str | Path
) -> int:
    """Serialize records to the TAEM binary layout.

    Accepts an open binary sink or a path.  Returns the number of bytes
    written.  Records are re-validated before writing; a violation raises
    FormatError naming the offending sentence id.
    """
    sink, owned = _as_binary_sink(destination)
    written = 0
    try:
        sink.write(MAGIC)
        sink.write(struct.pack("<I", VERSION))
        written += 8
        for record in records:
            try:
                record.validate()
            except ValueError as exc:
                raise FormatError(f"invalid record: {exc}") from exc
            flags = _FLAG_WORDS if record.words is not None else 0
            head = struct.pack(
                "<QIII", record.sentence_id, record.subword_count, record.dim, flags
            )
            ids = np.asarray(record.word_ids, dtype="<u4").tobytes()
            matrix = np.ascontiguousarray(record.embeddings, dtype="<f4").tobytes()
            sink.write(head)
            sink.write(ids)
            sink.write(matrix)
            written += len(head) + len(ids) + len(matrix)
            if record.words is not None:
                sink.write(struct.pack("<I", len(record.words)))
                written += 4
                for word in record.words:
                    raw = word.encode("utf-8")
                    sink.write(struct.pack("<I", len(raw)))
                    sink.write(raw)
                    written += 4 + len(raw)
    finally:
        if owned:
            sink.close()
    return written


class _Cursor:
    """Binary stream wrapper tracking the absolute byte offset for errors."""

    def __init__(self, stream: BinaryIO):
        self.stream = stream
        self.offset = 0
        self._peeked = b""

    def read_exact(self, size: int, what: str) -> bytes:
        parts = [self._peeked[:size]]
        self._peeked = self._peeked[size:]
        got = len(parts[0])
        while got < size:
            chunk = self.stream.read(size - got)
            if not chunk:
                break
            parts.append(chunk)
            got += len(chunk)
        if got < size:
            raise FormatError(
                f"truncated {what} at byte {self.offset}: "
                f"wanted {size} bytes, got {got}"
            )
        self.offset += size
        return b"".join(parts)

    def at_eof(self) -> bool:
        if self._peeked:
            return False
        probe = self.stream.read(1)
        if not probe:
            return True
        self._peeked = probe
        return False


def read_embeddings(source: BinaryIO | str | Path) -> Iterator[EmbeddingRecord]:
    """Parse a TAEM stream, yielding records in file order.

    Accepts an open binary stream or a path (opened and closed internally).
    The header is checked before the first record is yielded.
    """
    if hasattr(source, "read"):
        return _read_records(_Cursor(source))
    stream = open(source, "rb")

    def _owned() -> Iterator[EmbeddingRecord]:
        try:
            yield from _read_records(_Cursor(stream))
        finally:
            stream.close()

    return _owned()


def _read_records(cursor: _Cursor) -> Iterator[EmbeddingRecord]:
    magic = cursor.read_exact(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    (version,) = struct.unpack("<I", cursor.read_exact(4, "version"))
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    while not cursor.at_eof():
        yield _read_one(cursor)


def _read_one(cursor: _Cursor) -> EmbeddingRecord:
    start = cursor.offset
    sid, count, dim, flags = struct.unpack(
        "<QIII", cursor.read_exact(20, "record header")
    )
    if count < 1 or dim < 1:
        raise FormatError(
            f"record {sid} at byte {start}: empty matrix ({count}x{dim})"
        )
    ids_raw = cursor.read_exact(4 * count, f"word_ids of record {sid}")
    word_ids = np.frombuffer(ids_raw, dtype="<u4").tolist()
    matrix_raw = cursor.read_exact(4 * count * dim, f"matrix of record {sid}")
    embeddings = np.frombuffer(matrix_raw, dtype="<f4").reshape(count, dim)
    words: list[str] | None = None
    if flags & _FLAG_WORDS:
        (word_count,) = struct.unpack(
            "<I", cursor.read_exact(4, f"word count of record {sid}")
        )
        words = []
        for k in range(word_count):
            (length,) = struct.unpack(
                "<I", cursor.read_exact(4, f"word {k} length of record {sid}")
            )
            raw = cursor.read_exact(length, f"word {k} of record {sid}")
            try:
                words.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise FormatError(
                    f"record {sid} at byte {start}: word {k} is not UTF-8"
                ) from exc
    try:
        return EmbeddingRecord(sid, embeddings, word_ids, words)
    except ValueError as exc:
        raise FormatError(f"record at byte {start}: {exc}") from exc


@dataclass
class GoldAlignment:
    """Sure and possible gold alignment edges; sure is folded into possible."""

    sure: set[tuple[int, int]] = field(default_factory=set)
    possible: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.sure = set(self.sure)
        self.possible = set(self.possible) | self.sure


def _parse_index(text: str, token: str, line_no: int | None) -> int:
    if not text.isdigit():
        raise FormatError(_at_line(f"malformed alignment token {token!r}", line_no))
    return int(text)


def _at_line(message: str, line_no: int | None) -> str:
    return message if line_no is None else f"line {line_no}: {message}"


def parse_pharaoh(
    line: str, one_based: bool = False, line_no: int | None = None
) -> GoldAlignment:
    """Parse one Pharaoh line: "i-j" marks a sure edge, "i?j" a possible one.

    One-based input is shifted to zero-based; an index that becomes negative
    after the shift is rejected.
    """
    shift = 1 if one_based else 0
    sure: set[tuple[int, int]] = set()
    possible: set[tuple[int, int]] = set()
    for token in line.split():
        if "?" in token:
            left, _, right = token.partition("?")
            bucket = possible
        else:
            left, _, right = token.partition("-")
            bucket = sure
        i = _parse_index(left, token, line_no) - shift
        j = _parse_index(right, token, line_no) - shift
        if i < 0 or j < 0:
            raise FormatError(
                _at_line(f"negative index after shift in token {token!r}", line_no)
            )
        bucket.add((i, j))
    return GoldAlignment(sure=sure, possible=possible)


def format_pharaoh(gold: GoldAlignment, one_based: bool = False) -> str:
    """Inverse of parse_pharaoh; edges sorted by (i, j)."""
    shift = 1 if one_based else 0
    tokens = []
    for i, j in sorted(gold.possible):
        sep = "-" if (i, j) in gold.sure else "?"
        tokens.append(f"{i + shift}{sep}{j + shift}")
    return " ".join(tokens)


def parse_alignment(
    line: str, one_based: bool = False, line_no: int | None = None
) -> set[tuple[int, int]]:
    """Parse a predicted-alignment line: every edge counts, sure or possible."""
    return parse_pharaoh(line, one_based=one_based, line_no=line_no).possible


def format_alignment(pairs: Iterable[tuple[int, int]]) -> str:
    """Zero-based "i-j" tokens sorted by (i, j)."""
    return " ".join(f"{i}-{j}" for i, j in sorted(pairs))


def validate_tag(tag: str, line_no: int | None = None) -> None:
    """Reject anything that is not O, B-<type>, or I-<type>."""
    if tag == "O":
        return
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        return
    raise FormatError(_at_line(f"unknown BIO tag {tag!r}", line_no))


def parse_bio(source: TextIO | str | Path) -> list[tuple[list[str], list[str]]]:
    """Read a "token<TAB>tag" file; blank lines separate sentences.

    Returns one (words, tags) pair per sentence, in file order.
    """
    if hasattr(source, "read"):
        return _parse_bio_lines(source)
    with open(source, "r", encoding="utf-8") as handle:
        return _parse_bio_lines(handle)


def _parse_bio_lines(handle: TextIO) -> list[tuple[list[str], list[str]]]:
    sentences: list[tuple[list[str], list[str]]] = []
    words: list[str] = []
    tags: list[str] = []
    for line_no, raw in enumerate(handle, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            if words:
                sentences.append((words, tags))
                words, tags = [], []
            continue
        if "\t" not in line:
            raise FormatError(f"line {line_no}: expected 'token<TAB>tag', got {line!r}")
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise FormatError(f"line {line_no}: expected exactly one token and one tag")
        token, tag = fields
        validate_tag(tag, line_no)
        words.append(token)
        tags.append(tag)
    if words:
        sentences.append((words, tags))
    return sentences


def write_bio(
    sentences: Iterable[tuple[list[str], list[str]]],
    destination: TextIO | str | Path,
) -> None:
    """Write (words, tags) pairs in the parse_bio format, one blank line apart."""
    if hasattr(destination, "write"):
        _write_bio_lines(sentences, destination)
        return
    with open(destination, "w", encoding="utf-8") as handle:
        _write_bio_lines(sentences, handle)


def _write_bio_lines(
    sentences: Iterable[tuple[list[str], list[str]]], handle: TextIO
) -> None:
    for words, tags in sentences:
        if len(words) != len(tags):
            raise ValueError(
                f"sentence has {len(words)} tokens but {len(tags)} tags"
            )
        for word, tag in zip(words, tags):
            handle.write(f"{word}\t{tag}\n")
        handle.write("\n")
