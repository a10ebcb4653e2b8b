"""Sequence scoring on a toy posterior grid.

Walks through the scoring stack: CTC loss (forward algorithm, cross-checked
against literal path enumeration), autoregressive cross-entropy, their
multi-task combination, greedy decoding, and shallow-fusion rescoring of an
explicit hypothesis list.

Run:  python3 demos/03_sequence_scoring.py
"""

import itertools
import math

import numpy as np

from ltrkit import (
    FusionWeights,
    Hypothesis,
    PosteriorGrid,
    Vocabulary,
    attention_loss,
    collapse,
    ctc_loss,
    ctc_loss_bruteforce,
    greedy_ctc_decode,
    mtl_loss,
    rescore_hypotheses,
    tabular_lm_score,
)

vocab = Vocabulary(("a", "b"))
print(f"vocabulary: {vocab.tokens}, blank occupies column {vocab.blank_index}")

# Five frames over columns (a, b, blank); rows are per-frame distributions.
grid = PosteriorGrid(
    np.array(
        [
            [0.7, 0.1, 0.2],
            [0.5, 0.2, 0.3],
            [0.1, 0.1, 0.8],
            [0.1, 0.7, 0.2],
            [0.2, 0.6, 0.2],
        ]
    )
)
print(f"grid: {grid.num_frames} frames x ({grid.num_tokens} tokens + blank)")

print("\nCTC loss of a few targets (forward algorithm vs. path enumeration):")
for labels in (["a", "b"], ["a"], ["b", "a"], []):
    target = vocab.encode(labels)
    fast = ctc_loss(grid, target)
    slow = ctc_loss_bruteforce(grid, target)
    print(f"  {str(labels):12s} forward={fast:8.4f}  bruteforce={slow:8.4f}  agree={math.isclose(fast, slow, rel_tol=1e-9)}")

print("\nAn impossible target is reported as an infinite loss, not an error:")
print("  ['a','a'] with too few separator frames ->", ctc_loss(PosteriorGrid(np.full((2, 3), 1 / 3)), vocab.encode(["a", "a"])))

print("\nEvery path collapses to exactly one sequence, so exp(-loss) sums to 1:")
sequences = {collapse(p, vocab.blank_index) for p in itertools.product(range(3), repeat=grid.num_frames)}
print(f"  {len(sequences)} distinct sequences, total mass =", f"{sum(math.exp(-ctc_loss(grid, s)) for s in sequences):.9f}")

print("\nGreedy best-path decode:", vocab.decode(greedy_ctc_decode(grid)))

stepwise = np.array([[0.8, 0.2], [0.3, 0.7]])
att = attention_loss(stepwise, vocab.encode(["a", "b"]))
ctc = ctc_loss(grid, vocab.encode(["a", "b"]))
print(f"\nattention loss for ['a','b'] = {att:.4f}")
print(f"multi-task combination at weight 0.3: {mtl_loss(ctc, att, 0.3):.4f}")

print("\nShallow fusion over an explicit hypothesis list:")
lm = {vocab.encode(["a", "b"]): 0.5, vocab.encode(["b"]): 0.3, vocab.encode(["a"]): 0.2}
hypotheses = [
    Hypothesis(seq, log_p_ctc=-ctc_loss(grid, seq), log_p_att=-0.5 * len(seq) - 0.2, log_p_lm=tabular_lm_score(lm, seq))
    for seq in (vocab.encode(["a", "b"]), vocab.encode(["b"]), vocab.encode(["a"]))
]
for weights in (FusionWeights(ctc_weight=1.0, lm_weight=0.0), FusionWeights(ctc_weight=0.5, lm_weight=0.0), FusionWeights(ctc_weight=0.5, lm_weight=0.8)):
    best = rescore_hypotheses(hypotheses, weights)
    print(f"  alpha={weights.ctc_weight:.1f} beta={weights.lm_weight:.1f} -> {vocab.decode(best.tokens)} (fused {best.fused_score:.4f})")
