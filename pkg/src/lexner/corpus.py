"""Column-format NER data, tag schemes, mentions, and the dual-view corpus.

All functions here are pure; sentences are cheap immutable-ish records that
can be processed in parallel batches without shared state.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import DataError, ParseError, SchemeError

DOCSTART = "-DOCSTART-"

_TYPE_LABEL_RE = re.compile(r"^/[^/\s]+(/[^/\s]+)?$")


@dataclass(frozen=True)
class Token:
    """A single whitespace-free surface token."""

    surface: str

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise DataError(f"invalid token surface: {self.surface!r}")

    @property
    def lower(self) -> str:
        return self.surface.lower()

    def __str__(self) -> str:
        return self.surface


@dataclass(frozen=True, order=True)
class Mention:
    """Typed token span [start, end) within one sentence."""

    start: int
    end: int
    etype: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise DataError(f"invalid mention span ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class Sentence:
    """Tokenized sentence with optional gold mentions and/or a tag sequence.

    When both tags and mentions are present the caller is responsible for
    keeping them consistent; parsing and decoding paths in this module always
    populate exactly one of the two.
    """

    tokens: list[Token]
    mentions: list[Mention] | None = None
    tags: list[str] | None = None
    doc_index: int = 0

    def __post_init__(self):
        if self.tags is not None and len(self.tags) != len(self.tokens):
            raise DataError(
                f"tag count {len(self.tags)} != token count {len(self.tokens)}"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @classmethod
    def from_words(
        cls,
        words: Sequence[str],
        tags: Sequence[str] | None = None,
        mentions: Sequence[Mention] | None = None,
        doc_index: int = 0,
    ) -> "Sentence":
        return cls(
            tokens=[Token(w) for w in words],
            tags=list(tags) if tags is not None else None,
            mentions=list(mentions) if mentions is not None else None,
            doc_index=doc_index,
        )

    def with_tags(self, tags: Sequence[str]) -> "Sentence":
        return replace(self, tags=list(tags), mentions=None)


class TagScheme(str, Enum):
    IOB1 = "iob1"
    IOB2 = "iob2"
    BILOU = "bilou"

    @classmethod
    def parse(cls, name: str) -> "TagScheme":
        try:
            return cls(name.lower())
        except ValueError:
            raise DataError(f"unknown tag scheme: {name!r}") from None


class CapClass(IntEnum):
    """Coarse orthographic shape of a token; ids are stable."""

    ALL_UPPER = 0
    ALL_LOWER = 1
    UPPER_FIRST = 2
    UPPER_NOT_FIRST = 3
    NUMERIC = 4
    NO_ALPHANUM = 5


class TypeInventory:
    """Ordered set of entity-type labels; line order fixes feature dimensions.

    Labels look like "/person" or "/person/musician" (one or two levels).
    The position of a label in the inventory is its feature dimension and
    must never change once similarity tables have been built against it.
    """

    def __init__(self, labels: Sequence[str]):
        labels = list(labels)
        seen: dict[str, int] = {}
        for i, label in enumerate(labels):
            if not _TYPE_LABEL_RE.match(label):
                raise DataError(f"malformed type label: {label!r}")
            if label in seen:
                raise DataError(f"duplicate type label: {label!r}")
            seen[label] = i
        if not labels:
            raise DataError("type inventory is empty")
        self.labels: tuple[str, ...] = tuple(labels)
        self.index: dict[str, int] = seen

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeInventory) and self.labels == other.labels

    @classmethod
    def load(cls, path: str | Path) -> "TypeInventory":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln.strip() for ln in lines if ln.strip()])

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(f"{l}\n" for l in self.labels), encoding="utf-8")


# ---------------------------------------------------------------------------
# Column format I/O
# ---------------------------------------------------------------------------

def iter_column_sentences(
    lines: Iterable[str], require_tags: bool = True
) -> Iterator[Sentence]:
    """Stream sentences out of column-format lines.

    Each non-blank line is `token<sep>tag` (whitespace separator, the last
    field is the tag); a blank line ends a sentence; a line whose first field
    is "-DOCSTART-" starts a new document group and is not itself emitted.
    """
    words: list[str] = []
    tags: list[str] = []
    doc = 0
    started = False

    def flush() -> Sentence | None:
        nonlocal words, tags
        if not words:
            return None
        s = Sentence.from_words(words, tags, doc_index=doc)
        words, tags = [], []
        return s

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            s = flush()
            if s is not None:
                yield s
            continue
        fields = line.split()
        if fields[0] == DOCSTART:
            s = flush()
            if s is not None:
                yield s
            if started:
                doc += 1
            started = True
            continue
        started = True
        if len(fields) < 2:
            if require_tags:
                raise ParseError(f"missing tag column in {line!r}", lineno)
            words.append(fields[0])
            tags.append("O")
            continue
        words.append(fields[0])
        tags.append(fields[-1])
    s = flush()
    if s is not None:
        yield s


def parse_column_text(text: str, require_tags: bool = True) -> list[Sentence]:
    return list(iter_column_sentences(text.splitlines(), require_tags))


def load_column_file(path: str | Path, require_tags: bool = True) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return list(iter_column_sentences(fh, require_tags))


def format_column(sentences: Iterable[Sentence], extra_tags: Sequence[Sequence[str]] | None = None) -> str:
    """Render sentences back to column format.

    With `extra_tags` (one tag list per sentence, e.g. predictions) an extra
    final column is appended to every token line.
    """
    out: list[str] = []
    prev_doc = None
    for i, s in enumerate(sentences):
        if prev_doc is not None and s.doc_index != prev_doc:
            out.append(f"{DOCSTART} O")
            out.append("")
        prev_doc = s.doc_index
        tags = s.tags if s.tags is not None else ["O"] * len(s)
        extra = None
        if extra_tags is not None:
            extra = extra_tags[i]
            if len(extra) != len(s):
                raise DataError(f"sentence {i}: {len(extra)} extra tags for {len(s)} tokens")
        for j, (tok, tag) in enumerate(zip(s.tokens, tags)):
            if extra is not None:
                out.append(f"{tok.surface} {tag} {extra[j]}")
            else:
                out.append(f"{tok.surface} {tag}")
        out.append("")
    if out and out[-1] == "":
        out.pop()
    return "\n".join(out) + ("\n" if out else "")


def write_column_file(path: str | Path, sentences: Iterable[Sentence], extra_tags=None) -> None:
    Path(path).write_text(format_column(sentences, extra_tags), encoding="utf-8")


# ---------------------------------------------------------------------------
# Tag scheme machinery
# ---------------------------------------------------------------------------

_PREFIXES = {
    TagScheme.IOB1: "IB",
    TagScheme.IOB2: "IB",
    TagScheme.BILOU: "BILU",
}


def split_tag(tag: str, scheme: TagScheme, position: int) -> tuple[str, str | None]:
    """Split "B-PER" into ("B", "PER"); "O" into ("O", None)."""
    if tag == "O":
        return "O", None
    if len(tag) < 3 or tag[1] != "-" or tag[0] not in _PREFIXES[scheme]:
        raise SchemeError(f"malformed {scheme.value} tag {tag!r}", position)
    return tag[0], tag[2:]


def tags_to_mentions(
    tags: Sequence[str], scheme: TagScheme = TagScheme.BILOU, strict: bool = True
) -> list[Mention]:
    """Decode a tag sequence into its mention spans.

    Strict mode raises on any sequence the scheme does not license (used for
    gold data). Lenient mode repairs violations the way the classic chunk
    evaluation script does: an orphan continuation tag simply opens a new
    mention, and unterminated mentions are closed at the sentence end.
    """
    mentions: list[Mention] = []
    open_start: int | None = None
    open_type: str | None = None

    def close(end: int) -> None:
        nonlocal open_start, open_type
        if open_start is not None:
            mentions.append(Mention(open_start, end, open_type))
            open_start = open_type = None

    for i, tag in enumerate(tags):
        prefix, etype = split_tag(tag, scheme, i)

        if scheme is TagScheme.BILOU:
            if prefix == "O":
                if open_start is not None and strict:
                    raise SchemeError("O inside an open mention", i)
                close(i)
            elif prefix == "U":
                if open_start is not None and strict:
                    raise SchemeError("U inside an open mention", i)
                close(i)
                mentions.append(Mention(i, i + 1, etype))
            elif prefix == "B":
                if open_start is not None and strict:
                    raise SchemeError("B inside an open mention", i)
                close(i)
                open_start, open_type = i, etype
            elif prefix == "I":
                if open_start is None or open_type != etype:
                    if strict:
                        raise SchemeError(f"orphan I-{etype}", i)
                    close(i)
                    open_start, open_type = i, etype
            else:  # L
                if open_start is not None and open_type == etype:
                    close(i + 1)
                else:
                    if strict:
                        raise SchemeError(f"orphan L-{etype}", i)
                    close(i)
                    mentions.append(Mention(i, i + 1, etype))

        elif scheme is TagScheme.IOB2:
            if prefix == "O":
                close(i)
            elif prefix == "B":
                close(i)
                open_start, open_type = i, etype
            else:  # I
                if open_start is not None and open_type == etype:
                    pass
                else:
                    if strict:
                        raise SchemeError(f"orphan I-{etype}", i)
                    close(i)
                    open_start, open_type = i, etype

        else:  # IOB1
            if prefix == "O":
                close(i)
            elif prefix == "I":
                if open_start is not None and open_type == etype:
                    pass
                else:
                    close(i)
                    open_start, open_type = i, etype
            else:  # B: legal only to split two adjacent same-type mentions
                if open_start is not None and open_type == etype:
                    close(i)
                    open_start, open_type = i, etype
                else:
                    if strict:
                        raise SchemeError(
                            f"B-{etype} without preceding {etype} mention", i
                        )
                    close(i)
                    open_start, open_type = i, etype

    if open_start is not None:
        if scheme is TagScheme.BILOU and strict:
            raise SchemeError("mention not closed at sentence end", len(tags) - 1)
        close(len(tags))
    return mentions


def mentions_to_tags(
    mentions: Sequence[Mention], length: int, scheme: TagScheme = TagScheme.BILOU
) -> list[str]:
    """Encode non-overlapping mentions as a tag sequence of the given length."""
    ordered = sorted(mentions)
    prev: Mention | None = None
    for m in ordered:
        if m.end > length:
            raise DataError(f"mention ({m.start}, {m.end}) exceeds length {length}")
        if prev is not None and m.start < prev.end:
            raise DataError(
                f"overlapping mentions ({prev.start}, {prev.end}) and ({m.start}, {m.end})"
            )
        prev = m

    tags = ["O"] * length
    prev = None
    for m in ordered:
        if scheme is TagScheme.BILOU:
            if m.length == 1:
                tags[m.start] = f"U-{m.etype}"
            else:
                tags[m.start] = f"B-{m.etype}"
                for i in range(m.start + 1, m.end - 1):
                    tags[i] = f"I-{m.etype}"
                tags[m.end - 1] = f"L-{m.etype}"
        elif scheme is TagScheme.IOB2:
            tags[m.start] = f"B-{m.etype}"
            for i in range(m.start + 1, m.end):
                tags[i] = f"I-{m.etype}"
        else:  # IOB1
            adjacent_same = prev is not None and prev.end == m.start and prev.etype == m.etype
            tags[m.start] = f"B-{m.etype}" if adjacent_same else f"I-{m.etype}"
            for i in range(m.start + 1, m.end):
                tags[i] = f"I-{m.etype}"
        prev = m
    return tags


def convert_scheme(
    tags: Sequence[str], src: TagScheme, dst: TagScheme, strict: bool = True
) -> list[str]:
    """Re-encode a tag sequence from one scheme to another, mention set intact."""
    return mentions_to_tags(tags_to_mentions(tags, src, strict), len(tags), dst)


def validate_tags(tags: Sequence[str], scheme: TagScheme) -> None:
    tags_to_mentions(tags, scheme, strict=True)


# ---------------------------------------------------------------------------
# Capitalization classes
# ---------------------------------------------------------------------------

def capitalization_class(token: Token | str) -> CapClass:
    """Classify a token into exactly one orthographic shape class.

    Precedence: no alphanumerics at all; then digit-bearing tokens without
    letters; then the four letter-case classes.
    """
    s = token.surface if isinstance(token, Token) else token
    if not any(c.isalnum() for c in s):
        return CapClass.NO_ALPHANUM
    letters = [c for c in s if c.isalpha()]
    if not letters and any(c.isdigit() for c in s):
        return CapClass.NUMERIC
    if all(c.isupper() for c in letters):
        return CapClass.ALL_UPPER
    if all(c.islower() for c in letters):
        return CapClass.ALL_LOWER
    if s[0].isalpha() and s[0].isupper():
        return CapClass.UPPER_FIRST
    return CapClass.UPPER_NOT_FIRST


# ---------------------------------------------------------------------------
# Dual-view corpus
# ---------------------------------------------------------------------------

def build_dual_corpus(
    sentences: Iterable[Sentence], inventory: TypeInventory
) -> Iterator[str]:
    """Emit, per sentence, the lowercased token line followed by its variant
    with every mention span collapsed to its single type-label token.

    The two variants sit on adjacent lines so they stay inside one shuffling
    unit downstream. Tokens outside mentions are identical in both lines.
    """
    for n, s in enumerate(sentences):
        if s.mentions is None:
            mentions: list[Mention] = []
        else:
            mentions = sorted(s.mentions)
        prev_end = 0
        for m in mentions:
            if m.start < prev_end:
                raise DataError(f"sentence {n}: overlapping mentions at token {m.start}")
            if m.end > len(s):
                raise DataError(f"sentence {n}: mention ({m.start}, {m.end}) out of range")
            if m.etype not in inventory:
                raise DataError(f"sentence {n}: unknown entity type {m.etype!r}")
            prev_end = m.end

        lowered = [t.lower for t in s.tokens]
        yield " ".join(lowered)

        v2: list[str] = []
        pos = 0
        for m in mentions:
            v2.extend(lowered[pos : m.start])
            v2.append(m.etype)
            pos = m.end
        v2.extend(lowered[pos:])
        yield " ".join(v2)
