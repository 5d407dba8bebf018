"""Regenerate the bundled noun lexicon and plural exception table.

Source: the inflection table shipped in the ``lemminflect`` wheel (MIT).
Run once; the outputs are committed under ``src/cbsent/data``.

    pip download lemminflect --no-deps -d /tmp/dl
    python tools/build_lexicon.py /tmp/dl/lemminflect-*.whl
"""
import gzip
import re
import sys
import zipfile
from pathlib import Path

SUFFIX_RULES = [("ies", "y"), ("sses", "ss"), ("xes", "x"), ("ches", "ch"),
                ("shes", "sh"), ("ses", "s"), ("s", "")]

out = Path(__file__).resolve().parents[1] / "src" / "cbsent" / "data"
wheel = zipfile.ZipFile(sys.argv[1])
rows = gzip.decompress(wheel.read("lemminflect/resources/infl_lu.csv.gz")).decode()

nouns = {}
for line in rows.splitlines():
    lemma, pos, forms = line.split(",", 2)
    if pos == "noun" and re.fullmatch("[a-z]+", lemma):
        nouns[lemma] = [f for f in forms.split("/") if re.fullmatch("[a-z]+", f)]

lexicon = set(nouns)


def by_rules(word):
    for old, new in SUFFIX_RULES:
        if word.endswith(old) and word[: len(word) - len(old)] + new in lexicon:
            return word[: len(word) - len(old)] + new
    return None


exceptions = {}
for lemma, forms in nouns.items():
    for form in forms:
        if form == lemma or form in lexicon or by_rules(form) == lemma:
            continue
        exceptions.setdefault(form, lemma)

(out / "nouns.txt").write_text("".join(w + "\n" for w in sorted(lexicon)))
(out / "noun_exceptions.tsv").write_text(
    "".join(f"{k}\t{v}\n" for k, v in sorted(exceptions.items())))
print(len(lexicon), "nouns;", len(exceptions), "exceptions")
