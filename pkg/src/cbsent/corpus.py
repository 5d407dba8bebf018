"""Press-release ingestion: text cleaning, sentence segmentation, CSV I/O."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ._io import write_text_atomic
from .rng import Xoshiro256

SENTIMENTS = (-1, 0, 1)
SENTIMENT_NAMES = {-1: "Negative", 0: "Neutral", 1: "Positive"}

# Upper bound on full passes of the rule set when iterating to a fixed point.
MAX_CLEAN_PASSES = 50


class CorpusError(ValueError):
    """Base class for corpus validation problems."""


class RuleConfigError(CorpusError):
    pass


class SchemaError(CorpusError):
    pass


class ValidationError(CorpusError):
    pass


@dataclass(frozen=True)
class RawDocument:
    id: int
    text: str


@dataclass(frozen=True)
class LabeledSentence:
    document_id: int | None
    text: str
    sentiment: int | None = None


@dataclass(frozen=True)
class CleaningRule:
    pattern: str
    replacement: str = ""
    case_insensitive: bool = False
    dot_matches_newline: bool = False

    @property
    def flags(self) -> int:
        f = 0
        if self.case_insensitive:
            f |= re.IGNORECASE
        if self.dot_matches_newline:
            f |= re.DOTALL
        return f


class CleaningRuleSet:
    """Ordered regex substitutions, compiled once.

    Patterns are validated at construction; a bad pattern raises
    :class:`RuleConfigError` naming its (0-based) index.
    """

    def __init__(self, rules: Sequence[CleaningRule]):
        self.rules = list(rules)
        self._compiled = []
        for i, rule in enumerate(self.rules):
            try:
                self._compiled.append((re.compile(rule.pattern, rule.flags), rule.replacement))
            except re.error as exc:
                raise RuleConfigError(f"rule {i}: invalid pattern {rule.pattern!r}: {exc}") from None

    def __len__(self) -> int:
        return len(self.rules)

    def apply_once(self, text: str) -> str:
        for i, (regex, repl) in enumerate(self._compiled):
            try:
                text = regex.sub(repl, text)
            except (re.error, IndexError) as exc:
                raise RuleConfigError(f"rule {i}: invalid replacement {repl!r}: {exc}") from None
        return text

    @classmethod
    def parse(cls, source: str) -> "CleaningRuleSet":
        """Parse the ``PATTERN<TAB>REPLACEMENT<TAB>FLAGS`` line format.

        Blank lines and lines starting with ``#`` are skipped. FLAGS is any
        combination of ``I`` (ignore case) and ``S`` (dot matches newline),
        or ``-`` for none.
        """
        rules = []
        for lineno, line in enumerate(source.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise RuleConfigError(
                    f"rule {len(rules)} (line {lineno}): expected 3 tab-separated fields, got {len(parts)}")
            pattern, replacement, flags = parts
            unknown = set(flags) - set("IS-")
            if unknown:
                raise RuleConfigError(
                    f"rule {len(rules)} (line {lineno}): unknown flags {''.join(sorted(unknown))!r}")
            rules.append(CleaningRule(pattern, replacement, "I" in flags, "S" in flags))
        return cls(rules)

    @classmethod
    def load(cls, path: str | Path) -> "CleaningRuleSet":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines = []
        for r in self.rules:
            flags = ("I" if r.case_insensitive else "") + ("S" if r.dot_matches_newline else "")
            lines.append(f"{r.pattern}\t{r.replacement}\t{flags or '-'}\n")
        return "".join(lines)


_default_rules: CleaningRuleSet | None = None


def default_rules() -> CleaningRuleSet:
    """The bundled press-release cleaning rules (``data/cleaning_rules.tsv``)."""
    global _default_rules
    if _default_rules is None:
        text = resources.files("cbsent").joinpath("data/cleaning_rules.tsv").read_text(encoding="utf-8")
        _default_rules = CleaningRuleSet.parse(text)
    return _default_rules


def clean_text(raw: str, rules: CleaningRuleSet | None = None) -> str:
    """Apply the cleaning rules in order, repeating whole passes until stable.

    A single pass can expose new matches for earlier rules (a name removed
    between "Press" and "Conference", a reference number re-joined by the
    hyphenation fix), so the pass is repeated until the text stops changing.
    That makes the result idempotent by construction.
    """
    rules = default_rules() if rules is None else rules
    text = raw
    for _ in range(MAX_CLEAN_PASSES):
        out = rules.apply_once(text)
        if out == text:
            return out
        text = out
    return text


_TERMINATOR = re.compile(r"[.?!]+[\"'’”)\]]*(?=\s+[\"'‘“(\[]*[A-Z]|\s*$)")
ABBREVIATIONS = frozenset({"Mr.", "Mrs.", "Ms.", "Dr.", "No.", "e.g.", "i.e.", "U.S."})


def segment_sentences(text: str, abbreviations: Iterable[str] = ABBREVIATIONS) -> list[str]:
    """Split cleaned text into sentences.

    A boundary falls after a run of ``.``, ``?`` or ``!`` (plus any closing
    quotes/brackets) that is followed by whitespace and an uppercase letter,
    or by the end of the text. Known abbreviations (case-sensitive) never
    end a sentence, and decimals such as ``3.6`` are never split because no
    whitespace follows the point.

    >>> segment_sentences("Rates were held. Inflation rose.")
    ['Rates were held.', 'Inflation rose.']
    """
    abbrevs = frozenset(abbreviations)
    sentences = []
    start = 0
    for m in _TERMINATOR.finditer(text):
        head = text[start:m.end()]
        last_word = head.rsplit(None, 1)[-1] if head.strip() else ""
        stripped = last_word.rstrip("\"'’”)]")
        if stripped in abbrevs and m.end() < len(text.rstrip()):
            continue
        piece = head.strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def build_annotation_set(documents: Sequence[RawDocument], seed: int) -> list[LabeledSentence]:
    """Segment every document and shuffle all sentences with a seeded PRNG.

    Document text is expected to be cleaned already. Sentences keep their
    source document id; sentiment is left unset for annotators.
    """
    seen = set()
    for doc in documents:
        if doc.id in seen:
            raise ValidationError(f"duplicate document id {doc.id}")
        seen.add(doc.id)
    records = [LabeledSentence(doc.id, s, None)
               for doc in documents for s in segment_sentences(doc.text)]
    Xoshiro256(seed).shuffle(records)
    return records


def read_documents(path: str | Path) -> list[RawDocument]:
    """Read one ``.txt`` file, or every ``.txt`` file in a directory.

    Ids are assigned 1, 2, ... in sorted file-name order.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".txt")
    elif path.exists():
        files = [path]
    else:
        raise FileNotFoundError(f"no such file or directory: {path}")
    return [RawDocument(i, f.read_text(encoding="utf-8")) for i, f in enumerate(files, 1)]


def _parse_sentiment(value: str, rowno: int) -> int | None:
    value = value.strip()
    if value == "":
        return None
    try:
        number = float(value)
    except ValueError:
        raise ValidationError(f"row {rowno}: sentiment {value!r} is not a number") from None
    if number not in SENTIMENTS:
        raise ValidationError(f"row {rowno}: sentiment {value!r} not in {{-1, 0, 1}}")
    return int(number)


def parse_labeled_csv(source: str) -> list[LabeledSentence]:
    """Parse labeled-sentence CSV text (see :func:`load_labeled_csv`)."""
    lines = source.splitlines(keepends=True)
    # annotation templates carry a '#' guideline block above the header
    skip = 0
    while skip < len(lines) and lines[skip].startswith("#"):
        skip += 1
    reader = csv.reader(io.StringIO("".join(lines[skip:])))
    try:
        header = [h.strip().lstrip("﻿") for h in next(reader)]
    except StopIteration:
        raise SchemaError("empty file: expected header 'text,sentiment'") from None
    missing = {"text", "sentiment"} - set(header)
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(sorted(missing))}")
    i_text, i_sent = header.index("text"), header.index("sentiment")
    i_doc = header.index("document_id") if "document_id" in header else None

    records = []
    for rowno, row in enumerate(reader, 1):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"row {rowno}: expected {len(header)} fields, got {len(row)}")
        text = row[i_text].strip()
        if not text:
            raise ValidationError(f"row {rowno}: empty text")
        doc_id = None
        if i_doc is not None and row[i_doc].strip():
            try:
                doc_id = int(row[i_doc])
            except ValueError:
                raise ValidationError(f"row {rowno}: document_id {row[i_doc]!r} is not an integer") from None
            if doc_id < 1:
                raise ValidationError(f"row {rowno}: document_id must be positive")
        records.append(LabeledSentence(doc_id, text, _parse_sentiment(row[i_sent], rowno)))
    return records


def load_labeled_csv(path: str | Path) -> list[LabeledSentence]:
    """Load a ``text,sentiment`` CSV (optionally with a leading ``document_id``).

    Blank sentiment cells load as ``None``. Out-of-range labels and empty
    texts raise :class:`ValidationError` naming the 1-based data row.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_labeled_csv(fh.read())


def dumps_labeled_csv(records: Sequence[LabeledSentence], preamble: str = "") -> str:
    with_ids = any(r.document_id is not None for r in records)
    buf = io.StringIO()
    buf.write(preamble)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["document_id", "text", "sentiment"] if with_ids else ["text", "sentiment"])
    for r in records:
        sentiment = "" if r.sentiment is None else str(r.sentiment)
        if with_ids:
            writer.writerow(["" if r.document_id is None else r.document_id, r.text, sentiment])
        else:
            writer.writerow([r.text, sentiment])
    return buf.getvalue()


def save_labeled_csv(records: Sequence[LabeledSentence], path: str | Path, preamble: str = "") -> None:
    """Write records as RFC-4180 CSV with ``\\n`` line endings.

    The ``document_id`` column is written only when some record has one.
    The file is replaced atomically.
    """
    write_text_atomic(path, dumps_labeled_csv(records, preamble))
