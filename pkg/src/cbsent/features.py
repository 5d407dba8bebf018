"""Tokenization, noun lemmatization and binary TF-IDF featurization.

Weights are ``presence * (ln(N / df) + 1)`` with unsmoothed idf, followed by
L2 row normalization. Feature matrices are ``scipy.sparse.csr_matrix``
with sorted column indices.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ._io import write_text_atomic

DEFAULT_TOKEN_PATTERN = r"\b\d+\.\d+|\b\d+|\b\w+(?:-\w+)?\b"
VOCAB_MAGIC = "cbsent-vocab"
VOCAB_VERSION = "v1"

# Tried in order; the first candidate found in the lexicon wins.
NOUN_SUFFIX_RULES = (
    ("ies", "y"),
    ("sses", "ss"),
    ("xes", "x"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("ses", "s"),
    ("s", ""),
)


class EmptyVocabularyError(ValueError):
    pass


class VocabularyFormatError(ValueError):
    pass


def _data_lines(name: str) -> list[str]:
    text = resources.files("cbsent").joinpath(f"data/{name}").read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line and not line.startswith("#")]


@lru_cache(maxsize=None)
def stop_words() -> frozenset[str]:
    """The bundled 318-word English stop list."""
    return frozenset(_data_lines("stopwords.txt"))


class NounLemmatizer:
    """Noun-only lemmatizer: exception table, then suffix detachment.

    Parameters
    ----------
    lexicon : set of str
        Known noun base forms. A suffix rule only fires if its result is
        in the lexicon.
    exceptions : dict
        Irregular inflections (``children -> child``), checked first.
    """

    def __init__(self, lexicon: Iterable[str], exceptions: dict[str, str] | None = None):
        self.lexicon = frozenset(lexicon)
        self.exceptions = dict(exceptions or {})

    def __call__(self, token: str) -> str:
        if token in self.exceptions:
            return self.exceptions[token]
        for suffix, repl in NOUN_SUFFIX_RULES:
            if token.endswith(suffix):
                candidate = token[: len(token) - len(suffix)] + repl
                if candidate in self.lexicon:
                    return candidate
        return token

    @classmethod
    def from_files(cls, lexicon_path: str | Path, exceptions_path: str | Path | None = None) -> "NounLemmatizer":
        lexicon = Path(lexicon_path).read_text(encoding="utf-8").split()
        exceptions = {}
        if exceptions_path is not None:
            for line in Path(exceptions_path).read_text(encoding="utf-8").splitlines():
                if line and not line.startswith("#"):
                    form, lemma = line.split("\t")
                    exceptions[form] = lemma
        return cls(lexicon, exceptions)


@lru_cache(maxsize=None)
def default_lemmatizer() -> NounLemmatizer:
    exceptions = dict(line.split("\t") for line in _data_lines("noun_exceptions.tsv"))
    return NounLemmatizer(_data_lines("nouns.txt"), exceptions)


def lemmatize(token: str) -> str:
    """Reduce a token to its noun base form with the bundled lexicon.

    >>> lemmatize("policies")
    'policy'
    """
    return default_lemmatizer()(token)


@dataclass(frozen=True)
class TokenizerConfig:
    token_pattern: str = DEFAULT_TOKEN_PATTERN
    stop_words: frozenset[str] = field(default_factory=stop_words)
    lemmatizer: Callable[[str], str] = field(default_factory=default_lemmatizer)

    @property
    def regex(self) -> re.Pattern:
        return _compile(self.token_pattern)


@lru_cache(maxsize=32)
def _compile(pattern: str) -> re.Pattern:
    return re.compile(pattern)


def tokenize(text: str, config: TokenizerConfig | None = None) -> list[str]:
    """Lowercase, extract pattern matches, drop stop words, lemmatize.

    >>> tokenize("Headline inflation increased to 3.6 percent")
    ['headline', 'inflation', 'increased', '3.6', 'percent']
    """
    config = config or TokenizerConfig()
    lemma = config.lemmatizer
    stops = config.stop_words
    return [lemma(tok) for tok in config.regex.findall(text.lower()) if tok.lower() not in stops]


def ngrams(tokens: Sequence[str], ngram_min: int = 1, ngram_max: int = 3) -> set[str]:
    """Distinct space-joined n-grams of ``tokens`` with length in the range."""
    grams = set()
    for n in range(ngram_min, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.add(" ".join(tokens[i:i + n]))
    return grams


@dataclass
class Vocabulary:
    term_to_index: dict[str, int]
    document_frequency: np.ndarray
    corpus_size: int
    ngram_min: int = 1
    ngram_max: int = 3

    def __len__(self) -> int:
        return len(self.term_to_index)

    @property
    def terms(self) -> list[str]:
        return sorted(self.term_to_index, key=self.term_to_index.__getitem__)

    @property
    def idf(self) -> np.ndarray:
        return np.log(self.corpus_size / self.document_frequency) + 1.0

    def df(self, term: str) -> int:
        return int(self.document_frequency[self.term_to_index[term]])

    def dumps(self) -> str:
        lines = [f"{VOCAB_MAGIC} {VOCAB_VERSION} N={self.corpus_size}\n"]
        for term in self.terms:
            i = self.term_to_index[term]
            lines.append(f"{term}\t{i}\t{int(self.document_frequency[i])}\n")
        return "".join(lines)

    def save(self, path: str | Path) -> None:
        write_text_atomic(path, self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Vocabulary":
        lines = text.split("\n")
        m = re.fullmatch(rf"{VOCAB_MAGIC} (v\d+) N=(\d+)", lines[0])
        if m is None:
            raise VocabularyFormatError(f"bad header line: {lines[0]!r}")
        if m.group(1) != VOCAB_VERSION:
            raise VocabularyFormatError(f"unsupported vocabulary version {m.group(1)}")
        n_docs = int(m.group(2))
        term_to_index, dfs = {}, {}
        for lineno, line in enumerate(lines[1:], 2):
            if not line:
                continue
            try:
                term, index, df = line.split("\t")
                term_to_index[term] = int(index)
                dfs[int(index)] = int(df)
            except ValueError:
                raise VocabularyFormatError(f"line {lineno}: expected term<TAB>index<TAB>df") from None
        if sorted(dfs) != list(range(len(dfs))):
            raise VocabularyFormatError("column indices are not 0..|V|-1")
        lengths = [t.count(" ") + 1 for t in term_to_index] or [1]
        return cls(term_to_index, np.array([dfs[i] for i in range(len(dfs))], dtype=np.int64),
                   n_docs, min(lengths), max(lengths))

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def fit_vocabulary(texts: Sequence[str], config: TokenizerConfig | None = None,
                   ngram_range: tuple[int, int] = (1, 3)) -> Vocabulary:
    """Collect every n-gram in ``texts`` with its document frequency.

    Columns are assigned in lexicographic term order.
    """
    if not texts:
        raise EmptyVocabularyError("cannot fit a vocabulary on zero texts")
    lo, hi = ngram_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid ngram range {ngram_range}")
    config = config or TokenizerConfig()
    counts: dict[str, int] = {}
    for text in texts:
        for gram in ngrams(tokenize(text, config), lo, hi):
            counts[gram] = counts.get(gram, 0) + 1
    if not counts:
        raise EmptyVocabularyError("no terms survive tokenization")
    terms = sorted(counts)
    return Vocabulary({t: i for i, t in enumerate(terms)},
                      np.array([counts[t] for t in terms], dtype=np.int64),
                      len(texts), lo, hi)


def transform(texts: Sequence[str], vocab: Vocabulary, config: TokenizerConfig | None = None) -> sp.csr_matrix:
    """Binary TF-IDF rows, L2-normalized; out-of-vocabulary n-grams ignored."""
    config = config or TokenizerConfig()
    idf = vocab.idf
    indptr, indices, data = [0], [], []
    for text in texts:
        grams = ngrams(tokenize(text, config), vocab.ngram_min, vocab.ngram_max)
        cols = sorted(vocab.term_to_index[g] for g in grams if g in vocab.term_to_index)
        w = idf[cols]
        norm = math.sqrt(float(np.dot(w, w)))
        if norm > 0:
            w = w / norm
        indices.extend(cols)
        data.extend(w.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix((np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64),
                          np.array(indptr, dtype=np.int64)), shape=(len(texts), len(vocab)))


class TfidfVectorizer:
    """Fit/transform wrapper bundling a tokenizer config and a vocabulary."""

    def __init__(self, ngram_range: tuple[int, int] = (1, 3), config: TokenizerConfig | None = None):
        self.ngram_range = ngram_range
        self.config = config or TokenizerConfig()
        self.vocabulary_: Vocabulary | None = None

    def fit(self, texts: Sequence[str]) -> "TfidfVectorizer":
        self.vocabulary_ = fit_vocabulary(texts, self.config, self.ngram_range)
        return self

    def transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        if self.vocabulary_ is None:
            raise RuntimeError("vectorizer is not fitted")
        return transform(texts, self.vocabulary_, self.config)

    def fit_transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        return self.fit(texts).transform(texts)
