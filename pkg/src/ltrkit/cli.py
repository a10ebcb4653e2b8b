"""Single entry point exposing every pipeline stage as a subcommand.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to stderr;
data goes to files or stdout. Every source of randomness takes an explicit
seed, so identical arguments over identical inputs give bit-identical outputs,
at any ``--parallelism``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .audio_io import WavFormatError, read_wav, write_wav
from .dataset import (
    AugmentationSet,
    ManifestError,
    build_set,
    build_speed_set,
    load_manifest,
    save_manifest,
)
from .features import boundary_discontinuity, fbank, load_features, mvn, save_features, spectral_distance
from .ltr import DEFAULT_DURATIONS_MS, LtrConfig, reverse_segments
from .matrix_io import MatrixFormatError
from .metrics import TrnFormatError, align, read_trn, tokenize, top_confusions
from .perturb import SpecAugmentPolicy, spec_augment, speed_perturb
from .scoring import FusionWeights, Hypothesis, Vocabulary, ctc_loss, load_grid, rescore_hypotheses

__all__ = ["main", "run"]

_DATA_ERRORS = (WavFormatError, MatrixFormatError, ManifestError, TrnFormatError, OSError, ValueError, KeyError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive comma-separated numbers, got {text!r}")
    return values


def _default_parallelism() -> int:
    raw = os.environ.get("LTRKIT_PARALLELISM", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _open_out(path):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ltrkit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--verbose", action="store_true", help="per-file progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ltr", parents=[], help="render locally time-reversed audio")
    p.add_argument("--segment-ms", type=_positive_float, required=True, help="reversed segment duration in ms")
    p.add_argument("--in", dest="in_path", required=True, metavar="WAV")
    p.add_argument("--out", dest="out_path", required=True, metavar="WAV")
    p.add_argument("--codec", choices=("pcm16", "float32"), default="float32")
    p.set_defaults(func=_cmd_ltr)

    p = sub.add_parser("speed", help="speed-perturb audio by a playback factor")
    p.add_argument("--factor", type=_positive_float, required=True)
    p.add_argument("--in", dest="in_path", required=True, metavar="WAV")
    p.add_argument("--out", dest="out_path", required=True, metavar="WAV")
    p.add_argument("--codec", choices=("pcm16", "float32"), default="float32")
    p.set_defaults(func=_cmd_speed)

    p = sub.add_parser("specaug", help="mask time and frequency regions of a feature file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--freq-masks", type=int, default=2)
    p.add_argument("--freq-width", type=int, default=27, help="max frequency-mask width in bins")
    p.add_argument("--time-masks", type=int, default=2)
    p.add_argument("--time-fraction", type=float, default=0.05, help="max time-mask width as a fraction of frames")
    p.add_argument("--in", dest="in_path", required=True, metavar="FEAT")
    p.add_argument("--out", dest="out_path", required=True, metavar="FEAT")
    p.set_defaults(func=_cmd_specaug)

    p = sub.add_parser("featurize", help="extract log-mel filterbank features to an FBK1 file")
    p.add_argument("--in", dest="in_path", required=True, metavar="WAV")
    p.add_argument("--out", dest="out_path", required=True, metavar="FEAT")
    p.add_argument("--dims", type=_positive_int, default=80)
    p.add_argument("--window-ms", type=_positive_float, default=25.0)
    p.add_argument("--shift-ms", type=_positive_float, default=10.0)
    p.add_argument("--no-mvn", action="store_true", help="skip mean-variance normalization")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("build-set", help="build a 3-fold training set from a manifest (originals + one LTR pair)")
    p.add_argument("--set", dest="set_id", type=int, choices=range(1, 6), required=True, metavar="{1..5}")
    p.add_argument("--manifest", required=True, metavar="JSONL")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out-manifest", required=True, metavar="JSONL")
    p.add_argument("--parallelism", type=_positive_int, default=_default_parallelism())
    p.set_defaults(func=_cmd_build_set)

    p = sub.add_parser("build-speed-set", help="build a speed-perturbed training set from a manifest")
    p.add_argument("--factors", type=_float_list, default=[0.9, 1.0, 1.1], metavar="F,F,...")
    p.add_argument("--manifest", required=True, metavar="JSONL")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out-manifest", required=True, metavar="JSONL")
    p.add_argument("--parallelism", type=_positive_int, default=_default_parallelism())
    p.set_defaults(func=_cmd_build_speed_set)

    p = sub.add_parser("analyze", help="per-duration LTR distortion metrics as CSV (segment_ms,value)")
    p.add_argument("--metric", choices=("boundary", "spectral-distance"), required=True)
    p.add_argument("--in", dest="in_path", required=True, metavar="WAV")
    p.add_argument("--durations", type=_float_list, default=list(DEFAULT_DURATIONS_MS), metavar="MS,MS,...")
    p.add_argument("--out", dest="out_path", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("score", help="sequence scoring over posterior grids and hypothesis lists")
    score_sub = p.add_subparsers(dest="score_command", required=True, metavar="what")
    pc = score_sub.add_parser("ctc", help="CTC loss of a token sequence against a PST1 grid")
    pc.add_argument("--grid", required=True, metavar="PST")
    pc.add_argument("--vocab", required=True, help="space-separated token labels, in grid column order")
    pc.add_argument("--tokens", required=True, help="space-separated target labels (may be empty)")
    pc.set_defaults(func=_cmd_score_ctc)
    pf = score_sub.add_parser("fuse", help="rescore a JSONL hypothesis list by shallow fusion")
    pf.add_argument("--alpha", type=float, required=True, help="CTC weight in [0, 1]")
    pf.add_argument("--beta", type=float, required=True, help="language-model weight >= 0")
    pf.add_argument("--hyps", required=True, metavar="JSONL")
    pf.set_defaults(func=_cmd_score_fuse)

    p = sub.add_parser("wer", help="error rate between TRN reference and hypothesis files")
    p.add_argument("--ref", required=True, metavar="TRN")
    p.add_argument("--hyp", required=True, metavar="TRN")
    p.add_argument("--unit", choices=("word", "char", "phone"), default="word")
    p.add_argument("--confusions", type=_positive_int, default=None, metavar="N", help="print the top N substitution pairs")
    p.add_argument("--json-out", default=None, metavar="PATH", help="also write the report as JSON")
    p.set_defaults(func=_cmd_wer)

    return parser


def _cmd_ltr(args) -> int:
    buffer = read_wav(args.in_path)
    write_wav(reverse_segments(buffer, LtrConfig(args.segment_ms)), args.out_path, args.codec)
    return 0


def _cmd_speed(args) -> int:
    buffer = read_wav(args.in_path)
    write_wav(speed_perturb(buffer, args.factor), args.out_path, args.codec)
    return 0


def _cmd_specaug(args) -> int:
    policy = SpecAugmentPolicy(
        num_freq_masks=args.freq_masks,
        max_freq_mask_width=args.freq_width,
        num_time_masks=args.time_masks,
        max_time_mask_fraction=args.time_fraction,
        seed=args.seed,
    )
    save_features(spec_augment(load_features(args.in_path), policy), args.out_path)
    return 0


def _cmd_featurize(args) -> int:
    features = fbank(read_wav(args.in_path), args.dims, args.window_ms, args.shift_ms)
    if not args.no_mvn:
        features = mvn(features)
    save_features(features, args.out_path)
    return 0


def _cmd_build_set(args) -> int:
    records = load_manifest(args.manifest)
    out = build_set(records, AugmentationSet(args.set_id), args.out_dir, parallelism=args.parallelism)
    save_manifest(out, args.out_manifest)
    print(f"wrote {len(out)} records to {args.out_manifest}", file=sys.stderr)
    return 0


def _cmd_build_speed_set(args) -> int:
    records = load_manifest(args.manifest)
    out = build_speed_set(records, args.factors, args.out_dir, parallelism=args.parallelism)
    save_manifest(out, args.out_manifest)
    print(f"wrote {len(out)} records to {args.out_manifest}", file=sys.stderr)
    return 0


def _cmd_analyze(args) -> int:
    buffer = read_wav(args.in_path)
    rows = []
    if args.metric == "boundary":
        for duration_ms in args.durations:
            config = LtrConfig(duration_ms)
            rendered = reverse_segments(buffer, config)
            rows.append((duration_ms, boundary_discontinuity(rendered, config)))
    else:
        reference = fbank(buffer)
        for duration_ms in args.durations:
            rendered = reverse_segments(buffer, LtrConfig(duration_ms))
            rows.append((duration_ms, spectral_distance(reference, fbank(rendered))))
    out = _open_out(args.out_path)
    try:
        out.write("segment_ms,value\n")
        for duration_ms, value in rows:
            out.write(f"{duration_ms:g},{value:.9g}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_score_ctc(args) -> int:
    vocab = Vocabulary(tuple(args.vocab.split()))
    grid = load_grid(args.grid)
    if grid.num_tokens != vocab.size:
        raise ValueError(f"grid has {grid.num_tokens} token columns but the vocabulary has {vocab.size}")
    loss = ctc_loss(grid, vocab.encode(args.tokens.split()))
    print(f"{loss:.12g}")
    return 0


def _cmd_score_fuse(args) -> int:
    weights = FusionWeights(ctc_weight=args.alpha, lm_weight=args.beta)
    hypotheses = []
    with open(args.hyps, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                hypotheses.append(
                    Hypothesis(
                        tokens=tuple(obj["tokens"]),
                        log_p_ctc=float(obj["log_p_ctc"]),
                        log_p_att=float(obj["log_p_att"]),
                        log_p_lm=float(obj["log_p_lm"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{args.hyps}: line {line_no}: {exc}") from exc
    best = rescore_hypotheses(hypotheses, weights)
    print(json.dumps({"tokens": list(best.tokens), "fused_score": best.fused_score,
                      "log_p_ctc": best.log_p_ctc, "log_p_att": best.log_p_att, "log_p_lm": best.log_p_lm},
                     ensure_ascii=False))
    return 0


def _cmd_wer(args) -> int:
    refs = read_trn(args.ref)
    hyps = read_trn(args.hyp)
    if not refs:
        raise ValueError(f"{args.ref}: no utterances")
    missing = sorted(set(refs) ^ set(hyps))
    if missing:
        raise ValueError(f"utt_ids not present in both files: {', '.join(missing[:5])}")

    reports = []
    errors = ref_total = 0
    for utt_id, ref_text in refs.items():
        report = align(tokenize(ref_text, args.unit), tokenize(hyps[utt_id], args.unit))
        reports.append(report)
        errors += report.total_errors
        ref_total += report.ref_len
    rate = errors / ref_total
    totals = {
        "substitutions": sum(r.substitutions for r in reports),
        "insertions": sum(r.insertions for r in reports),
        "deletions": sum(r.deletions for r in reports),
        "hits": sum(r.hits for r in reports),
    }

    print(f"{args.unit} error rate: {100.0 * rate:.2f}%  ({errors} errors / {ref_total} ref tokens, {len(reports)} utterances)")
    print(f"S={totals['substitutions']} I={totals['insertions']} D={totals['deletions']} H={totals['hits']}")
    confusions = top_confusions(reports, args.confusions) if args.confusions else []
    if confusions:
        print("top substitutions:")
        for (ref_tok, hyp_tok), count in confusions:
            print(f"  {ref_tok} -> {hyp_tok}  {count}")
    if args.json_out:
        payload = {
            "unit": args.unit,
            "error_rate": rate,
            "ref_len": ref_total,
            "utterances": len(reports),
            **totals,
            "confusions": [[ref_tok, hyp_tok, count] for (ref_tok, hyp_tok), count in
                           top_confusions(reports, args.confusions or 10)],
        }
        Path(args.json_out).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return 0


def run(argv) -> int:
    """Parse and dispatch; returns the process exit code instead of exiting."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s"
    )
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
