"""Desk-scale sequence scoring over externally supplied probability grids.

Everything here operates on plain per-frame token posteriors rather than a
neural model, so the scoring rules can be exercised and cross-checked in
isolation: CTC loss via the forward algorithm (with a literal path-enumeration
oracle), autoregressive cross-entropy, their convex multi-task combination,
and shallow-fusion rescoring of explicit hypothesis lists.

Conventions. A grid has shape (T, K+1): K token columns and a final blank
column, each row a probability distribution (sums to 1 within 1e-6). Token
sequences are tuples of indices in [0, K). A frame-level path collapses to a
token sequence by deduplicating consecutive repeats and then dropping blanks;
the CTC loss of a target is -log of the total probability of all length-T
paths that collapse to it. Infeasible targets (no such path: the target plus
its required separator blanks needs more than T frames) score ``inf`` rather
than raising, so batch scoring never aborts.

All accumulation is in log space; ``-inf`` is a first-class value standing
for probability zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .matrix_io import POSTERIORS_MAGIC, read_matrix, write_matrix

__all__ = [
    "FusionWeights",
    "Hypothesis",
    "PosteriorGrid",
    "Vocabulary",
    "attention_loss",
    "collapse",
    "ctc_loss",
    "ctc_loss_bruteforce",
    "ctc_min_frames",
    "fused_score",
    "greedy_ctc_decode",
    "interleave_blanks",
    "load_grid",
    "mtl_loss",
    "rescore_hypotheses",
    "save_grid",
    "tabular_lm_score",
]

_ROW_SUM_TOL = 1e-6
_BRUTEFORCE_MAX_PATHS = 10_000_000
_LM_FLOOR = 1e-12


@dataclass(frozen=True)
class Vocabulary:
    """An ordered set of K distinct token labels. The blank label is not a
    member; it implicitly occupies index K (the last grid column)."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        if len(tokens) < 1:
            raise ValueError("vocabulary needs at least one token")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def blank_index(self) -> int:
        return len(self.tokens)

    def index(self, label: str) -> int:
        try:
            return self.tokens.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} is not in the vocabulary") from None

    def encode(self, labels: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.index(label) for label in labels)

    def decode(self, indices: Sequence[int]) -> list[str]:
        return [self.tokens[i] for i in indices]


@dataclass(frozen=True)
class PosteriorGrid:
    """Per-frame token probabilities: T rows over K tokens plus blank."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] < 1 or probs.shape[1] < 2:
            raise ValueError(f"grid must be (frames, tokens+blank) with at least one of each, got shape {probs.shape}")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("grid entries must lie in [0, 1]")
        sums = probs.sum(axis=1)
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums[worst] - 1.0) > _ROW_SUM_TOL:
            raise ValueError(f"grid row {worst} sums to {sums[worst]!r}, expected 1 within {_ROW_SUM_TOL}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def num_frames(self) -> int:
        return self.probs.shape[0]

    @property
    def num_tokens(self) -> int:
        return self.probs.shape[1] - 1

    @property
    def blank_index(self) -> int:
        return self.num_tokens


@dataclass(frozen=True)
class Hypothesis:
    """A candidate token sequence with its component log-probabilities.

    ``fused_score`` is filled in by :func:`rescore_hypotheses`; it is always
    recomputable from the components and the weights used.
    """

    tokens: tuple
    log_p_ctc: float
    log_p_att: float
    log_p_lm: float
    fused_score: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class FusionWeights:
    """Weights for score fusion.

    ``ctc_weight`` interpolates between the CTC and attention log-probabilities
    at decode time, ``lm_weight`` scales the language-model contribution, and
    ``task_weight`` is the CTC share of the two-term training loss.
    """

    ctc_weight: float
    lm_weight: float
    task_weight: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.ctc_weight <= 1.0:
            raise ValueError(f"ctc_weight must be in [0, 1], got {self.ctc_weight}")
        if self.lm_weight < 0.0:
            raise ValueError(f"lm_weight must be non-negative, got {self.lm_weight}")
        if not 0.0 <= self.task_weight <= 1.0:
            raise ValueError(f"task_weight must be in [0, 1], got {self.task_weight}")


def _as_grid(grid: PosteriorGrid | np.ndarray) -> PosteriorGrid:
    return grid if isinstance(grid, PosteriorGrid) else PosteriorGrid(np.asarray(grid, dtype=np.float64))


def _validated_target(target: Sequence[int], num_tokens: int) -> tuple[int, ...]:
    target = tuple(int(t) for t in target)
    for t in target:
        if not 0 <= t < num_tokens:
            raise ValueError(f"target token {t} is outside [0, {num_tokens})")
    return target


def collapse(path: Sequence[int], blank_index: int) -> tuple[int, ...]:
    """Reduce a frame-level path to its token sequence: drop consecutive
    duplicates, then drop blanks."""
    out = []
    previous = None
    for label in path:
        if label != previous:
            if label != blank_index:
                out.append(label)
            previous = label
    return tuple(out)


def interleave_blanks(target: Sequence[int], blank_index: int) -> tuple[int, ...]:
    """The 2U+1 state sequence for the forward algorithm: blanks between,
    before, and after the target tokens."""
    out = [blank_index]
    for token in target:
        out.append(token)
        out.append(blank_index)
    return tuple(out)


def ctc_min_frames(target: Sequence[int]) -> int:
    """Fewest frames any path collapsing to ``target`` can have: one per
    token plus one separator blank per adjacent equal pair."""
    target = tuple(target)
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def ctc_loss(grid: PosteriorGrid | np.ndarray, target: Sequence[int]) -> float:
    """-log of the total probability of all paths collapsing to ``target``.

    Standard forward algorithm over the blank-interleaved state sequence in
    log space. Finite and non-negative for feasible targets; ``inf`` when no
    path collapses to the target (too few frames, or every such path has
    probability zero).
    """
    grid = _as_grid(grid)
    target = _validated_target(target, grid.num_tokens)
    states = np.asarray(interleave_blanks(target, grid.blank_index))
    num_states = len(states)

    with np.errstate(divide="ignore"):
        logp = np.log(grid.probs)

    alpha = np.full(num_states, -np.inf)
    alpha[0] = logp[0, states[0]]
    if num_states > 1:
        alpha[1] = logp[0, states[1]]

    # A state may additionally inherit from two states back when that skip
    # does not jump over a required separator blank.
    can_skip = np.zeros(num_states, dtype=bool)
    can_skip[2:] = (states[2:] != grid.blank_index) & (states[2:] != states[:-2])

    for t in range(1, grid.num_frames):
        from_prev = np.concatenate(([-np.inf], alpha))[:num_states]
        from_skip = np.concatenate(([-np.inf, -np.inf], alpha))[:num_states]
        total = np.logaddexp(alpha, from_prev)
        total = np.where(can_skip, np.logaddexp(total, from_skip), total)
        alpha = total + logp[t, states]

    log_total = alpha[-1] if num_states == 1 else np.logaddexp(alpha[-1], alpha[-2])
    return math.inf if log_total == -np.inf else float(-log_total)


def ctc_loss_bruteforce(grid: PosteriorGrid | np.ndarray, target: Sequence[int]) -> float:
    """Literal enumeration oracle for :func:`ctc_loss`.

    Walks every one of the (K+1)^T frame-level paths, sums the probabilities
    of those whose collapse equals ``target``, and returns -log of the sum.
    Paths are materialized in fixed-size chunks by mixed-radix decoding of
    the path index, so memory stays bounded.

    Raises:
        ValueError: if (K+1)^T exceeds 10^7.
    """
    grid = _as_grid(grid)
    probs = grid.probs
    frames, width = probs.shape
    blank = grid.blank_index
    target = _validated_target(target, grid.num_tokens)

    num_paths = width**frames
    if num_paths > _BRUTEFORCE_MAX_PATHS:
        raise ValueError(f"{num_paths} paths exceed the brute-force budget of {_BRUTEFORCE_MAX_PATHS}")

    target_arr = np.asarray(target, dtype=np.int64)
    digits = width ** np.arange(frames - 1, -1, -1, dtype=np.int64)
    frame_index = np.arange(frames)

    total = 0.0
    chunk = 1 << 16
    for lo in range(0, num_paths, chunk):
        ids = np.arange(lo, min(lo + chunk, num_paths), dtype=np.int64)
        paths = (ids[:, None] // digits) % width
        path_probs = probs[frame_index, paths].prod(axis=1)

        survives = np.ones(paths.shape, dtype=bool)
        survives[:, 1:] = paths[:, 1:] != paths[:, :-1]
        survives &= paths != blank
        candidates = survives.sum(axis=1) == len(target)
        if len(target) == 0:
            total += path_probs[candidates].sum()
        elif np.any(candidates):
            tokens = paths[candidates][survives[candidates]].reshape(-1, len(target))
            matches = (tokens == target_arr).all(axis=1)
            total += path_probs[candidates][matches].sum()

    return -math.log(total) if total > 0.0 else math.inf


def attention_loss(stepwise_probs: Sequence[Sequence[float]] | np.ndarray, target: Sequence[int]) -> float:
    """Autoregressive cross-entropy: -sum over steps of log p(target token).

    ``stepwise_probs`` holds one distribution over the K tokens per output
    step (rows sum to 1 within 1e-6). Empty targets score 0. A zero
    probability at any target position makes the loss ``inf``.
    """
    probs = np.asarray(stepwise_probs, dtype=np.float64)
    target = tuple(int(t) for t in target)
    if len(target) == 0 and probs.size == 0:
        return 0.0
    if probs.ndim != 2:
        raise ValueError(f"stepwise_probs must be 2-D, got shape {probs.shape}")
    if probs.shape[0] != len(target):
        raise ValueError(f"{probs.shape[0]} steps for {len(target)} target tokens")
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValueError("stepwise probabilities must lie in [0, 1]")
    if np.any(np.abs(probs.sum(axis=1) - 1.0) > _ROW_SUM_TOL):
        raise ValueError(f"every step distribution must sum to 1 within {_ROW_SUM_TOL}")
    for t in target:
        if not 0 <= t < probs.shape[1]:
            raise ValueError(f"target token {t} is outside [0, {probs.shape[1]})")

    picked = probs[np.arange(len(target)), np.asarray(target)]
    if np.any(picked == 0.0):
        return math.inf
    return float(-np.sum(np.log(picked)))


def mtl_loss(ctc_loss_value: float, attention_loss_value: float, task_weight: float) -> float:
    """Convex combination of the two training losses.

    The endpoints return the corresponding loss verbatim, so an infinite
    partner loss cannot leak NaNs into a pure single-task score.
    """
    if not 0.0 <= task_weight <= 1.0:
        raise ValueError(f"task_weight must be in [0, 1], got {task_weight}")
    if task_weight == 0.0:
        return attention_loss_value
    if task_weight == 1.0:
        return ctc_loss_value
    return task_weight * ctc_loss_value + (1.0 - task_weight) * attention_loss_value


def _weighted(weight: float, value: float) -> float:
    # 0 * -inf would be NaN; a zero weight always removes the term instead.
    return 0.0 if weight == 0.0 else weight * value


def fused_score(hypothesis: Hypothesis, weights: FusionWeights) -> float:
    """Decode-time score: CTC and attention log-probabilities interpolated by
    ``ctc_weight``, plus ``lm_weight`` times the language-model log-probability."""
    return (
        _weighted(weights.ctc_weight, hypothesis.log_p_ctc)
        + _weighted(1.0 - weights.ctc_weight, hypothesis.log_p_att)
        + _weighted(weights.lm_weight, hypothesis.log_p_lm)
    )


def rescore_hypotheses(hypotheses: Sequence[Hypothesis], weights: FusionWeights) -> Hypothesis:
    """The hypothesis with the highest fused score.

    Ties break toward the lexicographically smaller token sequence, then
    toward the earlier list position. The returned hypothesis carries its
    ``fused_score``.
    """
    if not hypotheses:
        raise ValueError("cannot rescore an empty hypothesis list")
    best = None
    best_score = -math.inf
    for hypothesis in hypotheses:
        score = fused_score(hypothesis, weights)
        if best is None or score > best_score or (score == best_score and hypothesis.tokens < best.tokens):
            best, best_score = hypothesis, score
    return replace(best, fused_score=best_score)


def greedy_ctc_decode(grid: PosteriorGrid | np.ndarray) -> tuple[int, ...]:
    """Best-path decode: per-frame argmax (ties toward the lower index),
    collapsed."""
    grid = _as_grid(grid)
    path = np.argmax(grid.probs, axis=1)
    return collapse(path.tolist(), grid.blank_index)


def tabular_lm_score(
    table: Mapping[tuple, float], tokens: Sequence, floor: float = _LM_FLOOR
) -> float:
    """Log-probability of a token sequence under an explicit finite table.

    Sequences outside the table's support (or with a non-positive entry)
    get ``log(floor)``.

    Raises:
        ValueError: if the table's probabilities sum to more than 1.
    """
    mass = sum(table.values())
    if mass > 1.0 + 1e-9:
        raise ValueError(f"table probabilities sum to {mass}, more than 1")
    p = table.get(tuple(tokens), 0.0)
    return math.log(p) if p > 0.0 else math.log(floor)


def save_grid(grid: PosteriorGrid, path: str | Path) -> None:
    """Write a posterior grid as a PST1 container (float32 on disk)."""
    write_matrix(grid.probs, path, POSTERIORS_MAGIC)


def load_grid(path: str | Path) -> PosteriorGrid:
    """Read a PST1 container; row distributions are re-validated on load."""
    return PosteriorGrid(read_matrix(path, POSTERIORS_MAGIC))
