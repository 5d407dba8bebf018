"""Versioned text serialization for fitted models.

Layout::

    cbsent-model v1 family=<nb|svm|rf>
    labels -1 0 1
    n_features 1234
    ...family sections...
    end

Floats are written with 17 significant digits, so ``load(save(m))``
reproduces every parameter exactly and saving again is byte-identical.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .._io import write_text_atomic
from .forest import RFModel, RFParams, Tree
from .naive_bayes import NBModel
from .svm import BinaryMachine, SVMModel, SVMParams

MAGIC = "cbsent-model"
VERSION = "v1"


class ModelFormatError(ValueError):
    """Unreadable model file; ``offset`` is the byte offset of the bad line."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IncompatibleVersionError(ModelFormatError):
    pass


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _floats(values) -> str:
    return " ".join(_f(v) for v in values)


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in values)


def dumps_model(model) -> str:
    family = model.family
    out = [f"{MAGIC} {VERSION} family={family}",
           f"labels {_ints(model.labels)}",
           f"n_features {model.n_features}"]
    if family == "nb":
        out.append(f"alpha {_f(model.alpha)}")
        out.append(f"log_prior {_floats(model.log_prior)}")
        for row in model.log_likelihood:
            out.append(f"log_likelihood {_floats(row)}")
    elif family == "svm":
        p = model.params
        max_iter = "none" if p.max_iter is None else str(p.max_iter)
        out.append(f"params C={_f(p.C)} kernel={p.kernel} gamma={_f(p.gamma)} degree={p.degree} "
                   f"coef0={_f(p.coef0)} tolerance={_f(p.tolerance)} max_iter={max_iter}")
        out.append(f"machines {len(model.machines)}")
        for m in model.machines:
            sv = sp.csr_matrix(m.support_vectors)
            sv.sort_indices()
            out.append(f"machine {m.positive} {m.negative} bias={_f(m.bias)} n_sv={sv.shape[0]} "
                       f"iterations={m.iterations} converged={int(m.converged)}")
            for r in range(sv.shape[0]):
                lo, hi = sv.indptr[r], sv.indptr[r + 1]
                entries = " ".join(f"{c}:{_f(v)}" for c, v in zip(sv.indices[lo:hi], sv.data[lo:hi]))
                out.append(f"sv {_f(m.alpha[r])} {int(m.y[r])} {entries}".rstrip())
    elif family == "rf":
        p = model.params
        out.append(f"params n_estimators={p.n_estimators} max_depth={p.max_depth} "
                   f"min_samples_split={p.min_samples_split} max_features={p.max_features} "
                   f"seed={p.seed} bootstrap={int(p.bootstrap)}")
        out.append(f"trees {len(model.trees)}")
        for t in model.trees:
            out.append(f"tree {t.n_nodes}")
            for i in range(t.n_nodes):
                if t.feature[i] >= 0:
                    out.append(f"split {t.feature[i]} {_f(t.threshold[i])} {t.left[i]} {t.right[i]} {t.value[i]}")
                else:
                    out.append(f"leaf {t.value[i]}")
    else:
        raise ValueError(f"unknown model family {family!r}")
    out.append("end")
    return "\n".join(out) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.pos = 0
        self.offsets = []
        off = 0
        for line in self.lines:
            self.offsets.append(off)
            off += len(line.encode("utf-8")) + 1

    def offset(self) -> int:
        return self.offsets[min(self.pos, len(self.offsets) - 1)]

    def fail(self, message: str):
        raise ModelFormatError(message, self.offset())

    def next(self, keyword: str) -> list[str]:
        if self.pos >= len(self.lines) or self.lines[self.pos] == "":
            self.fail(f"unexpected end of file, expected {keyword!r}")
        parts = self.lines[self.pos].split(" ")
        if parts[0] != keyword:
            self.fail(f"expected {keyword!r}, found {parts[0]!r}")
        self.pos += 1
        return parts[1:]

    def kv(self, keyword: str) -> dict[str, str]:
        fields = self.next(keyword)
        try:
            return dict(f.split("=", 1) for f in fields if "=" in f)
        except ValueError:
            self.pos -= 1
            self.fail(f"malformed key=value fields in {keyword!r} line")

    def convert(self, fn, *args):
        """Apply ``fn``; errors are reported at the line just consumed."""
        try:
            return fn(*args)
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            self.pos -= 1
            self.fail(f"bad value: {exc!r}")


def loads_model(text: str):
    r = _Reader(text)
    header = r.lines[0] if r.lines else ""
    m = re.fullmatch(rf"{MAGIC} (v\d+) family=(\w+)", header)
    if m is None:
        r.fail("not a cbsent model file (bad header)")
    if m.group(1) != VERSION:
        raise IncompatibleVersionError(f"model format {m.group(1)} is not supported (expected {VERSION})", 0)
    family = m.group(2)
    r.pos = 1
    labels = r.convert(lambda p: np.array([int(v) for v in p], dtype=np.int64), r.next("labels"))
    n_features = r.convert(lambda p: int(p[0]), r.next("n_features"))

    if family == "nb":
        alpha = r.convert(lambda p: float(p[0]), r.next("alpha"))
        log_prior = r.convert(lambda p: np.array([float(v) for v in p]), r.next("log_prior"))
        rows = [r.convert(lambda p: [float(v) for v in p], r.next("log_likelihood")) for _ in labels]
        if len(log_prior) != len(labels) or any(len(row) != n_features for row in rows):
            r.fail("naive Bayes tables do not match labels/n_features")
        model = NBModel(labels, log_prior, np.array(rows, dtype=np.float64).reshape(len(labels), n_features), alpha)
    elif family == "svm":
        kv = r.kv("params")

        def mkparams():
            return SVMParams(C=float(kv["C"]), kernel=kv["kernel"], gamma=float(kv["gamma"]),
                             degree=int(kv["degree"]), coef0=float(kv["coef0"]),
                             tolerance=float(kv["tolerance"]),
                             max_iter=None if kv["max_iter"] == "none" else int(kv["max_iter"]))
        params = r.convert(mkparams)
        n_machines = r.convert(lambda p: int(p[0]), r.next("machines"))
        machines = []
        for _ in range(n_machines):

            def parse_head(head):
                kv = dict(f.split("=", 1) for f in head[2:])
                return (int(head[0]), int(head[1]), float(kv["bias"]), int(kv["n_sv"]),
                        int(kv["iterations"]), bool(int(kv["converged"])))
            pos_label, neg_label, bias, n_sv, iters, ok = r.convert(parse_head, r.next("machine"))
            alpha, ys, indptr, indices, data = [], [], [0], [], []
            for _ in range(n_sv):
                parts = r.next("sv")

                def parse_sv():
                    alpha.append(float(parts[0]))
                    ys.append(float(parts[1]))
                    for entry in parts[2:]:
                        c, v = entry.split(":")
                        indices.append(int(c))
                        data.append(float(v))
                    indptr.append(len(indices))
                r.convert(parse_sv)
            sv = sp.csr_matrix((np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64),
                                np.array(indptr, dtype=np.int64)), shape=(n_sv, n_features))
            machines.append(BinaryMachine(pos_label, neg_label, sv, np.array(alpha), np.array(ys),
                                          bias, iters, ok))
        model = SVMModel(labels, params, machines, n_features)
    elif family == "rf":
        kv = r.kv("params")
        params = r.convert(lambda: RFParams(
            n_estimators=int(kv["n_estimators"]), max_depth=int(kv["max_depth"]),
            min_samples_split=int(kv["min_samples_split"]), max_features=kv["max_features"],
            seed=int(kv["seed"]), bootstrap=bool(int(kv["bootstrap"]))))
        n_trees = r.convert(lambda p: int(p[0]), r.next("trees"))
        trees = []
        for _ in range(n_trees):
            n_nodes = r.convert(lambda p: int(p[0]), r.next("tree"))
            feature, threshold, left, right, value = [], [], [], [], []
            for _ in range(n_nodes):
                line = r.lines[r.pos] if r.pos < len(r.lines) else ""
                if line.startswith("split "):
                    f, thr, lo, hi, v = r.convert(
                        lambda p: (int(p[0]), float(p[1]), int(p[2]), int(p[3]), int(p[4])), r.next("split"))
                    feature.append(f), threshold.append(thr), left.append(lo), right.append(hi), value.append(v)
                else:
                    v = r.convert(lambda p: int(p[0]), r.next("leaf"))
                    feature.append(-1), threshold.append(0.0), left.append(-1), right.append(-1), value.append(v)
            trees.append(Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                              np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                              np.array(value, dtype=np.int64)))
        model = RFModel(labels, params, trees, n_features)
    else:
        r.pos = 0
        r.fail(f"unknown model family {family!r}")
    r.next("end")
    return model


def save_model(model, path: str | Path) -> None:
    """Write ``model`` atomically (temporary file in the same directory, then rename)."""
    write_text_atomic(path, dumps_model(model))


def load_model(path: str | Path):
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError("model file is not valid UTF-8", exc.start) from None
    return loads_model(text)
