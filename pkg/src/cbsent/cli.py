"""Batch command-line front end: ``cbsent <command> --config <path> ...``.

Commands
--------
clean              raw ``.txt`` file or directory -> cleaned text
segment            cleaned text -> ``document_id,text,sentiment`` CSV (sentiment blank)
annotate-template  raw text -> cleaned, segmented, shuffled CSV with label guidelines
stats              labeled CSV -> class distribution
train              labeled CSV -> vocabulary, one model per family, CV log
evaluate           labeled CSV + trained artifacts -> comparison report on the held-out rows
predict            CSV with a ``text`` column -> ``text,predicted_sentiment``

Exit status is 0 on success, 1 on runtime or data validation errors and 2
on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import corpus, evaluation, features, models
from ._io import write_text_atomic

log = logging.getLogger("cbsent")

FAMILY_ORDER = ("rf", "svm", "nb")  # report order
VOCAB_FILE = "vocabulary.tsv"
CV_LOG_FILE = "cv_log.tsv"
MODEL_FILE = "{family}.model"

GUIDELINES = """\
# Sentiment annotation template.
# Fill the sentiment column of every row with one of:
#    1  positive: the sentence points to stronger activity, easing risks,
#       or an outlook that is improving for the economy.
#   -1  negative: the sentence points to weaker activity, rising risks,
#       or an outlook that is deteriorating for the economy.
#    0  neutral: procedural or factual content with no clear direction,
#       or a balanced mix of good and bad news.
# Judge each sentence on its own, without the surrounding document.
# Lines starting with '#' are ignored when the file is loaded.
"""


class ConfigError(ValueError):
    """Invalid configuration file or command-line usage (exit status 2)."""


@dataclass
class RunConfig:
    seed: int = 42
    test_fraction: float = 0.2
    cv_folds: int = 5
    ngram_min: int = 1
    ngram_max: int = 3
    n_jobs: int = 1
    grids: dict[str, evaluation.GridSpec] = field(
        default_factory=lambda: {f: evaluation.GridSpec(g.family, dict(g.params))
                                 for f, g in evaluation.DEFAULT_GRIDS.items()})
    input: Path | None = None
    rules: Path | None = None
    model_dir: Path = Path("model")
    report: Path | None = None
    output: Path | None = None


_SCALARS = {"seed": int, "test_fraction": float, "cv_folds": int, "ngram_min": int,
            "ngram_max": int, "n_jobs": int}
_PATHS = ("input", "rules", "model_dir", "report", "output")


def _grid_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str, base: Path = Path(".")) -> RunConfig:
    """Parse flat ``key = value`` lines; relative paths resolve against ``base``.

    Grid keys look like ``grid.svm.C = 0.1, 1, 10``: setting any key of a
    family replaces that parameter's list and keeps the others at default.
    """
    config = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _SCALARS:
            try:
                setattr(config, key, _SCALARS[key](value))
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: {key} expects {_SCALARS[key].__name__}, got {value!r}") from None
        elif key in _PATHS:
            if not value:
                raise ConfigError(f"line {lineno}: {key} needs a path")
            setattr(config, key, base / value)
        elif key.startswith("grid."):
            _, family, param = (key.split(".", 2) + ["", ""])[:3]
            if family not in models.FAMILIES:
                raise ConfigError(f"line {lineno}: unknown model family in {key!r}")
            names = {f.name for f in dataclasses.fields(models.FAMILIES[family][0])}
            if param not in names:
                raise ConfigError(f"line {lineno}: unknown {family} parameter {param!r}")
            values = [_grid_value(v.strip()) for v in value.split(",") if v.strip()]
            if not values:
                raise ConfigError(f"line {lineno}: {key} needs at least one value")
            for v in values:
                try:
                    models.make_params(family, {param: v})
                except (models.ParameterError, TypeError, ValueError) as exc:
                    raise ConfigError(f"line {lineno}: {key}: {exc}") from None
            config.grids[family].params[param] = values
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if not 0 < config.test_fraction < 1:
        raise ConfigError(f"test_fraction must be in (0, 1), got {config.test_fraction}")
    if config.cv_folds < 2:
        raise ConfigError(f"cv_folds must be at least 2, got {config.cv_folds}")
    if not 1 <= config.ngram_min <= config.ngram_max:
        raise ConfigError(f"invalid n-gram range {config.ngram_min}..{config.ngram_max}")
    return config


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config file is not UTF-8: {path}") from None
    return parse_config_text(text, path.parent)


# ---------------------------------------------------------------------------
# commands


def _require_input(config: RunConfig) -> Path:
    if config.input is None:
        raise ConfigError("no input: pass --input or set 'input' in the config")
    return config.input


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_text_atomic(out, text)


def _rules(config: RunConfig) -> corpus.CleaningRuleSet:
    return corpus.default_rules() if config.rules is None else corpus.CleaningRuleSet.load(config.rules)


def cmd_clean(config: RunConfig, families: list[str]) -> None:
    source = _require_input(config)
    rules = _rules(config)
    if source.is_dir():
        if config.output is None:
            raise ConfigError("cleaning a directory needs --out <directory>")
        config.output.mkdir(parents=True, exist_ok=True)
        for path in sorted(p for p in source.iterdir() if p.suffix.lower() == ".txt"):
            cleaned = corpus.clean_text(path.read_text(encoding="utf-8"), rules)
            write_text_atomic(config.output / path.name, cleaned + "\n")
    else:
        [doc] = corpus.read_documents(source)
        _emit(corpus.clean_text(doc.text, rules) + "\n", config.output)


def cmd_segment(config: RunConfig, families: list[str]) -> None:
    docs = corpus.read_documents(_require_input(config))
    records = [corpus.LabeledSentence(d.id, s) for d in docs for s in corpus.segment_sentences(d.text)]
    _emit(corpus.dumps_labeled_csv(records), config.output)


def cmd_annotate_template(config: RunConfig, families: list[str]) -> None:
    rules = _rules(config)
    docs = [corpus.RawDocument(d.id, corpus.clean_text(d.text, rules))
            for d in corpus.read_documents(_require_input(config))]
    records = corpus.build_annotation_set(docs, config.seed)
    out = config.output or Path("sentences_for_annotation.csv")
    write_text_atomic(out, corpus.dumps_labeled_csv(records, GUIDELINES))
    log.info("wrote %d sentences from %d documents to %s", len(records), len(docs), out)


def _load_labeled(config: RunConfig) -> tuple[list[str], np.ndarray]:
    records = corpus.load_labeled_csv(_require_input(config))
    unlabeled = [i for i, r in enumerate(records, 1) if r.sentiment is None]
    if unlabeled:
        raise corpus.ValidationError(f"row {unlabeled[0]}: missing sentiment label")
    if not records:
        raise corpus.ValidationError("no labeled rows")
    return [r.text for r in records], np.array([r.sentiment for r in records], dtype=np.int64)


def cmd_stats(config: RunConfig, families: list[str]) -> None:
    records = corpus.load_labeled_csv(_require_input(config))
    labels = [r.sentiment for r in records if r.sentiment is not None]
    _emit(evaluation.format_distribution(evaluation.class_distribution(labels)), config.output)


def cmd_train(config: RunConfig, families: list[str]) -> None:
    texts, y = _load_labeled(config)
    split = evaluation.stratified_split(y, config.test_fraction, config.seed)
    train_texts = [texts[i] for i in split.train]
    tok = features.TokenizerConfig()
    vocab = features.fit_vocabulary(train_texts, tok, (config.ngram_min, config.ngram_max))
    X = features.transform(train_texts, vocab, tok)
    y_train = y[split.train]
    log.info("train rows %d, test rows %d, vocabulary %d terms", len(split.train), len(split.test), len(vocab))

    config.model_dir.mkdir(parents=True, exist_ok=True)
    write_text_atomic(config.model_dir / VOCAB_FILE, vocab.dumps())
    cv_lines = ["family\tcandidate\tparams\tmean_cv_macro_f1\tselected\n"]
    for family in families:
        grid = config.grids[family]
        base = {"seed": config.seed} if family == "rf" else None
        best, scores = evaluation.grid_search(family, grid, X, y_train, config.cv_folds, config.seed,
                                              base, config.n_jobs)
        winner = max(range(len(scores)), key=lambda i: (scores[i], -i))
        for i, (cand, score) in enumerate(zip(grid.candidates(), scores)):
            params = " ".join(f"{k}={v}" for k, v in cand.items())
            cv_lines.append(f"{family}\t{i}\t{params}\t{score!r}\t{int(i == winner)}\n")
        log.info("%s best parameters: %s", family, best)
        model = models.fit(family, X, y_train, best)
        models.save_model(model, config.model_dir / MODEL_FILE.format(family=family))
    write_text_atomic(config.model_dir / CV_LOG_FILE, "".join(cv_lines))


def _load_vocab(config: RunConfig) -> features.Vocabulary:
    path = config.model_dir / VOCAB_FILE
    if not path.exists():
        raise FileNotFoundError(f"no vocabulary at {path}; run 'train' first")
    return features.Vocabulary.load(path)


def _load_family(config: RunConfig, family: str):
    path = config.model_dir / MODEL_FILE.format(family=family)
    if not path.exists():
        raise FileNotFoundError(f"no {family} model at {path}; run 'train' first")
    return models.load_model(path)


def _available(config: RunConfig, families: list[str]) -> list[str]:
    return [f for f in families if (config.model_dir / MODEL_FILE.format(family=f)).exists()]


def cmd_evaluate(config: RunConfig, families: list[str]) -> None:
    texts, y = _load_labeled(config)
    split = evaluation.stratified_split(y, config.test_fraction, config.seed)
    vocab = _load_vocab(config)
    if vocab.corpus_size != len(split.train):
        raise corpus.ValidationError(
            f"vocabulary was fitted on {vocab.corpus_size} rows but this split has "
            f"{len(split.train)} training rows; retrain with the same data and config")
    present = _available(config, families)
    if not present:
        raise FileNotFoundError(f"no trained models in {config.model_dir}")
    X_test = features.transform([texts[i] for i in split.test], vocab, features.TokenizerConfig())
    y_test = y[split.test]
    reports = {}
    for family in present:
        model = _load_family(config, family)
        reports[models.FAMILY_NAMES[family]] = evaluation.classification_report(
            y_test, model.predict(X_test), corpus.SENTIMENTS)
    markdown = evaluation.render_markdown(reports)
    out = config.output or config.report
    if out is None:
        sys.stdout.write(markdown)
    else:
        write_text_atomic(out, markdown)
        write_text_atomic(out.with_suffix(".kv"), evaluation.render_keyvalue(reports))


def _read_texts(path: Path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or "text" not in [h.strip() for h in rows[0]]:
        raise corpus.SchemaError("missing column: text")
    col = [h.strip() for h in rows[0]].index("text")
    texts = []
    for rowno, row in enumerate(rows[1:], 1):
        if not row:
            continue
        if len(row) != len(rows[0]):
            raise corpus.SchemaError(f"row {rowno}: expected {len(rows[0])} fields, got {len(row)}")
        texts.append(row[col])
    return texts


def cmd_predict(config: RunConfig, families: list[str]) -> None:
    if len(families) != 1:
        present = _available(config, families)
        if len(present) != 1:
            raise ConfigError("predict needs a single model: pass --family nb|svm|rf")
        families = present
    model = _load_family(config, families[0])
    vocab = _load_vocab(config)
    texts = _read_texts(_require_input(config))
    labels = model.predict(features.transform(texts, vocab, features.TokenizerConfig())) if texts else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["text", "predicted_sentiment"])
    for text, label in zip(texts, labels):
        writer.writerow([text, int(label)])
    _emit(buf.getvalue(), config.output)


COMMANDS = {
    "clean": cmd_clean,
    "segment": cmd_segment,
    "annotate-template": cmd_annotate_template,
    "stats": cmd_stats,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cbsent", description="Sentiment classification of central-bank press releases.")
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="flat 'key = value' configuration file")
    parser.add_argument("--input", type=Path, help="input file or directory (overrides 'input')")
    parser.add_argument("--model", type=Path, help="model directory (overrides 'model_dir')")
    parser.add_argument("--out", type=Path, help="output path (default: stdout or the config value)")
    parser.add_argument("--family", choices=["nb", "svm", "rf", "all"], default="all")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    return parser


def run(config: RunConfig, command: str, families: Sequence[str] = FAMILY_ORDER) -> None:
    COMMANDS[command](config, list(families))


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        config = parse_config(args.config)
        if args.input is not None:
            config.input = args.input
        if args.model is not None:
            config.model_dir = args.model
        if args.out is not None:
            config.output = args.out
        families = list(FAMILY_ORDER) if args.family == "all" else [args.family]
        run(config, args.command, families)
    except ConfigError as exc:
        print(f"cbsent: configuration error: {exc}", file=sys.stderr)
        return 2
    except corpus.RuleConfigError as exc:
        print(f"cbsent: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"cbsent: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
