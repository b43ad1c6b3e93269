"""Relative scoring and ranking of binarization methods.

Given a complete table of metric reports (method x image), each cell
contributes one term per measure: the method holding the best value of a
measure on an image earns 1, every other method earns the fraction of the
best it achieved (value/best for higher-is-better measures, best/value for
lower-is-better ones).  Terms are summed into a per-method score in
(0, images*6]; higher scores rank better, ties share the better rank.

Edge rules keeping every term in [0, 1]: a value equal to the best scores
exactly 1 (this covers shared zeros and shared infinite PSNR); a finite
PSNR against an infinite best scores 0; a positive value against a zero
best for a lower-is-better measure scores 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InsufficientMethodsError
from .metrics import HIGHER_IS_BETTER, MEASURE_KEYS, MetricReport


@dataclass
class ResultTable:
    """Complete method x image grid of metric reports."""

    methods: list[str]
    images: list[str]
    values: dict[tuple[str, str], MetricReport] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.images:
            raise ValueError("result table needs at least one image")
        missing = [
            (m, i)
            for m in self.methods
            for i in self.images
            if (m, i) not in self.values
        ]
        if missing:
            raise KeyError(f"result table missing cells: {missing[:5]}")

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "ResultTable":
        """Build from evaluation rows ({image, method, <measure keys>})."""
        methods = sorted({r["method"] for r in rows})
        images = sorted({r["image"] for r in rows})
        values = {
            (r["method"], r["image"]): MetricReport.from_json_dict(r) for r in rows
        }
        table = cls(methods=methods, images=images, values=values)
        table.validate()
        return table


def best_per_cell(table: ResultTable) -> dict[tuple[str, str], float]:
    """Best value of each measure on each image across methods.

    Maximum for fmeasure/pfmeasure/psnr, minimum for drd/mpm/nrm.
    """
    table.validate()
    best: dict[tuple[str, str], float] = {}
    for image in table.images:
        for key in MEASURE_KEYS:
            vals = [table.values[(m, image)].values()[key] for m in table.methods]
            best[(image, key)] = max(vals) if key in HIGHER_IS_BETTER else min(vals)
    return best


def score_term(value: float, best: float, higher_better: bool) -> float:
    """One Eq-of-merit fraction; always in [0, 1]."""
    if value == best:
        return 1.0
    if higher_better:
        if math.isinf(best) or best == 0.0:
            return 0.0
        return value / best
    if best == 0.0 or math.isinf(value):
        return 0.0
    return best / value


@dataclass
class ScoreBoard:
    """Per-method total score and 1-based competition rank."""

    methods: list[str]
    scores: dict[str, float]
    ranks: dict[str, int]

    def ordered(self) -> list[tuple[str, float, int]]:
        """(method, score, rank) rows sorted by rank, then method id."""
        return sorted(
            ((m, self.scores[m], self.ranks[m]) for m in self.methods),
            key=lambda row: (row[2], row[0]),
        )

    def to_json_dict(self) -> dict:
        return {
            "methods": [
                {"method": m, "score": s, "rank": r} for m, s, r in self.ordered()
            ]
        }

    def to_csv(self) -> str:
        lines = ["method,score,rank"]
        lines += [f"{m},{s:.4f},{r}" for m, s, r in self.ordered()]
        return "\n".join(lines) + "\n"


def rank_scores(scores: dict[str, float]) -> dict[str, int]:
    """Competition ranking: rank = 1 + number of strictly higher scores."""
    return {
        m: 1 + sum(1 for other in scores.values() if other > s)
        for m, s in scores.items()
    }


def score(table: ResultTable) -> ScoreBoard:
    """Total relative score per method over all images and measures."""
    table.validate()
    if len(table.methods) < 2:
        raise InsufficientMethodsError(
            f"scoring needs at least 2 methods, got {len(table.methods)}"
        )
    best = best_per_cell(table)
    scores: dict[str, float] = {}
    for m in table.methods:
        total = 0.0
        for image in table.images:
            report = table.values[(m, image)].values()
            for key in MEASURE_KEYS:
                total += score_term(
                    report[key], best[(image, key)], key in HIGHER_IS_BETTER
                )
        scores[m] = total
    return ScoreBoard(methods=list(table.methods), scores=scores, ranks=rank_scores(scores))


def load_evaluation_rows(path) -> tuple[list[dict], dict]:
    """Read rows from a cmd-evaluate JSON output; returns (rows, options)."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "rows" not in doc:
        raise ValueError(f"{path}: not an evaluation JSON document (no 'rows')")
    return doc["rows"], doc.get("options", {})
