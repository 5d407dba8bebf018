"""Seeded generator of press-release-like labeled sentences.

Sentences are assembled from templates: a shared subject and context
phrase around a class-specific predicate. The predicates carry the label,
so the three classes are separable while sharing most of their words.
Used for benchmarks and demos; the real labeled corpus is not bundled.
"""

from __future__ import annotations

from .corpus import LabeledSentence
from .rng import Xoshiro256

SUBJECTS = [
    "The Thai economy", "Headline inflation", "Core inflation", "Private consumption",
    "Merchandise exports", "The tourism sector", "Manufacturing production",
    "Private investment", "The labor market", "Financial conditions",
    "Household income", "The services sector", "Credit growth", "Public spending",
    "The current account", "Foreign tourist arrivals",
]

PREDICATES = {
    1: [
        "is expected to recover steadily", "continued to improve", "expanded robustly",
        "strengthened further", "picked up notably", "showed a favorable recovery",
        "rebounded strongly", "gained momentum", "is projected to grow solidly",
        "supported a broad-based recovery", "improved considerably", "remained resilient and robust",
    ],
    -1: [
        "weakened markedly", "contracted sharply", "remained fragile",
        "faced rising downside risks", "deteriorated further", "slowed considerably",
        "was hampered by elevated costs", "posed risks to economic stability",
        "declined amid uncertainty", "suffered from tighter conditions",
        "remained under pressure", "fell short of expectations",
    ],
    0: [
        "was reported by the Committee", "was published in the statement",
        "was discussed at the meeting", "is measured on a quarterly basis",
        "was recorded in the data release", "was reviewed by the Committee",
        "is compiled by the statistics office", "was noted in the document",
        "is assessed each quarter", "was presented in the projection table",
        "is defined in the annual report", "was covered in the briefing",
    ],
}

CONTEXTS = [
    "", "in 2023", "in 2024", "in the first quarter", "over the forecast horizon",
    "according to the latest data", "during the review period", "in the second half of the year",
    "compared with the previous meeting", "at 2.5 percent",
]

DEFAULT_PROPORTIONS = {-1: 0.213, 0: 0.387, 1: 0.40}


def class_counts(n: int, proportions: dict[int, float] = DEFAULT_PROPORTIONS) -> dict[int, int]:
    """Integer class sizes summing to ``n`` (largest remainder)."""
    quotas = {c: p * n for c, p in proportions.items()}
    counts = {c: int(q) for c, q in quotas.items()}
    for c in sorted(quotas, key=lambda c: counts[c] - quotas[c])[: n - sum(counts.values())]:
        counts[c] += 1
    return counts


def generate_corpus(n: int = 800, seed: int = 42,
                    counts: dict[int, int] | None = None) -> list[LabeledSentence]:
    """``n`` labeled template sentences in shuffled order.

    ``counts`` fixes the exact class sizes; by default they follow
    :data:`DEFAULT_PROPORTIONS`. Document ids cycle through 26 pseudo
    press releases.
    """
    counts = class_counts(n) if counts is None else dict(counts)
    if sum(counts.values()) != n:
        raise ValueError(f"class counts {counts} do not sum to {n}")
    rng = Xoshiro256(seed)
    labels = [c for c in sorted(counts) for _ in range(counts[c])]
    rng.shuffle(labels)
    records = []
    for i, label in enumerate(labels):
        subject = SUBJECTS[rng.below(len(SUBJECTS))]
        predicate = PREDICATES[label][rng.below(len(PREDICATES[label]))]
        context = CONTEXTS[rng.below(len(CONTEXTS))]
        text = " ".join(part for part in (subject, predicate, context) if part) + "."
        records.append(LabeledSentence(i % 26 + 1, text, label))
    return records
