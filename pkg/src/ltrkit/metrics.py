"""Error-rate scoring: Levenshtein alignment with backtrace, error-type
counts, and substitution confusion tables.

Rates are (substitutions + insertions + deletions) / reference length. The
same alignment serves word, character, and phone units; only tokenization
differs. Corpus rates are pooled (total errors over total reference tokens),
not averaged per utterance.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

__all__ = ["ErrorReport", "TrnFormatError", "align", "corpus_rate", "read_trn", "tokenize", "top_confusions"]

_UNITS = ("word", "char", "phone")


class TrnFormatError(Exception):
    """Raised for transcript files without the trailing ``(utt_id)`` marker."""


@dataclass
class ErrorReport:
    """Alignment outcome for one reference/hypothesis pair.

    ``hits + substitutions + deletions == ref_len`` always holds. The rate
    can exceed 1 through insertions.
    """

    substitutions: int
    insertions: int
    deletions: int
    hits: int
    ref_len: int
    confusions: Counter = field(default_factory=Counter)

    @property
    def total_errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def rate(self) -> float:
        return self.total_errors / self.ref_len


def tokenize(text: str, unit: str) -> list[str]:
    """Split a transcript into scoring units.

    ``word`` and ``phone`` split on whitespace runs; ``char`` removes all
    whitespace and yields one unit per grapheme (a base character plus any
    combining marks), so decomposed accents count once.
    """
    if unit not in _UNITS:
        raise ValueError(f"unit must be one of {_UNITS}, got {unit!r}")
    if unit in ("word", "phone"):
        return text.split()
    clusters: list[str] = []
    for ch in "".join(text.split()):
        if clusters and unicodedata.combining(ch):
            clusters[-1] += ch
        else:
            clusters.append(ch)
    return clusters


def _align(ref: Sequence[str], hyp: Sequence[str]) -> ErrorReport:
    n, m = len(ref), len(hyp)
    # Unit-cost edit distance; row i is the cost of aligning ref[:i].
    cost = [list(range(m + 1))]
    for i in range(1, n + 1):
        row = [i] + [0] * m
        prev = cost[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (ref[i - 1] != hyp[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)
        cost.append(row)

    # Backtrace preference at equal cost: substitution, deletion, insertion.
    hits = subs = dels = ins = 0
    confusions: Counter = Counter()
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            if ref[i - 1] == hyp[j - 1]:
                hits += 1
            else:
                subs += 1
                confusions[(ref[i - 1], hyp[j - 1])] += 1
            i, j = i - 1, j - 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return ErrorReport(subs, ins, dels, hits, n, confusions)


def align(ref: Sequence[str], hyp: Sequence[str]) -> ErrorReport:
    """Minimum-edit-distance alignment of hypothesis against reference.

    Raises:
        ValueError: if the reference is empty (the rate would be undefined).
    """
    if len(ref) == 0:
        raise ValueError("reference is empty; error rate is undefined")
    return _align(list(ref), list(hyp))


def corpus_rate(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Pooled rate over a corpus: sum of errors over sum of reference lengths.

    Pairs with an empty reference contribute their hypothesis tokens as
    insertions; at least one reference must be non-empty.
    """
    errors = 0
    ref_total = 0
    for ref, hyp in pairs:
        report = _align(list(ref), list(hyp))
        errors += report.total_errors
        ref_total += report.ref_len
    if ref_total == 0:
        raise ValueError("all references are empty; corpus rate is undefined")
    return errors / ref_total


def top_confusions(reports: Sequence[ErrorReport], n: int) -> list[tuple[tuple[str, str], int]]:
    """The ``n`` most frequent substitution pairs, ties in lexicographic order."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    merged: Counter = Counter()
    for report in reports:
        merged.update(report.confusions)
    return sorted(merged.items(), key=lambda item: (-item[1], item[0]))[:n]


def read_trn(path: str | Path) -> dict[str, str]:
    """Parse a TRN transcript file: per line, tokens then ``(utt_id)``.

    Returns id -> transcript in file order.

    Raises:
        TrnFormatError: missing id marker or duplicate id (with line number).
    """
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if not line.endswith(")") or "(" not in line:
                raise TrnFormatError(f"{path}: line {line_no} lacks a trailing (utt_id)")
            text, _, utt_id = line[:-1].rpartition("(")
            utt_id = utt_id.strip()
            if not utt_id:
                raise TrnFormatError(f"{path}: line {line_no} has an empty utt_id")
            if utt_id in out:
                raise TrnFormatError(f"{path}: line {line_no} repeats utt_id {utt_id!r}")
            out[utt_id] = text.strip()
    return out
