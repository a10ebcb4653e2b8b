from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltrkit.metrics import ErrorReport, TrnFormatError, align, corpus_rate, read_trn, tokenize, top_confusions

tokens_st = st.lists(st.sampled_from("abcd"), max_size=6)


def simple_edit_distance(a, b):
    """Independent two-row DP, distance only; the oracle for S+I+D."""
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1]))
        prev = cur
    return prev[len(b)]


# ---------------------------------------------------------------- tokenize


def test_tokenize_words_split_on_whitespace_runs():
    assert tokenize("a b  c", "word") == ["a", "b", "c"]
    assert tokenize("  hello\tworld \n", "word") == ["hello", "world"]


def test_tokenize_chars_drop_whitespace():
    assert tokenize("你好 吗", "char") == ["你", "好", "吗"]
    assert tokenize("ab c", "char") == ["a", "b", "c"]


def test_tokenize_chars_keep_combining_marks_with_base():
    # decomposed e + COMBINING ACUTE counts as one unit
    assert tokenize("éf", "char") == ["é", "f"]


def test_tokenize_phones():
    assert tokenize("sil m ao m sil", "phone") == ["sil", "m", "ao", "m", "sil"]


def test_tokenize_empty():
    for unit in ("word", "char", "phone"):
        assert tokenize("", unit) == []


def test_tokenize_rejects_unknown_unit():
    with pytest.raises(ValueError):
        tokenize("a", "syllable")


# ---------------------------------------------------------------- align


def test_align_identity():
    report = align(["a", "b", "c"], ["a", "b", "c"])
    assert (report.substitutions, report.insertions, report.deletions, report.hits) == (0, 0, 0, 3)
    assert report.rate == 0.0


def test_align_forced_deletion():
    report = align(["a", "b", "c"], ["a", "c"])
    assert report.deletions == 1 and report.total_errors == 1
    assert report.rate == pytest.approx(1 / 3)


def test_align_records_substitution_pair():
    report = align(["m"], ["n"])
    assert report.substitutions == 1
    assert report.confusions == Counter({("m", "n"): 1})


def test_align_empty_hypothesis_is_all_deletions():
    report = align(["a", "b"], [])
    assert report.deletions == 2 and report.hits == 0
    assert report.rate == 1.0


def test_align_empty_reference_rejected():
    with pytest.raises(ValueError, match="empty"):
        align([], ["a"])


def test_rate_can_exceed_one():
    report = align(["a"], ["x", "y", "z"])
    assert report.rate > 1.0


def test_counts_partition_reference():
    report = align(list("kitten"), list("sitting"))
    assert report.hits + report.substitutions + report.deletions == report.ref_len == 6
    assert report.total_errors == 3  # classic example


@settings(max_examples=150, deadline=None)
@given(ref=tokens_st, hyp=tokens_st)
def test_total_errors_equal_independent_edit_distance(ref, hyp):
    if not ref:
        return
    report = align(ref, hyp)
    assert report.total_errors == simple_edit_distance(ref, hyp)
    assert report.hits + report.substitutions + report.deletions == len(ref)


@settings(max_examples=100, deadline=None)
@given(ref=tokens_st.filter(bool), hyp=tokens_st.filter(bool))
def test_swap_symmetry(ref, hyp):
    forward = align(ref, hyp)
    backward = align(hyp, ref)
    assert forward.total_errors == backward.total_errors
    assert forward.substitutions == backward.substitutions
    assert forward.insertions == backward.deletions
    assert forward.deletions == backward.insertions


@settings(max_examples=60, deadline=None)
@given(a=tokens_st.filter(bool), b=tokens_st.filter(bool), c=tokens_st.filter(bool))
def test_triangle_inequality(a, b, c):
    assert align(a, c).total_errors <= align(a, b).total_errors + align(b, c).total_errors


# ---------------------------------------------------------------- corpus rate


def test_corpus_rate_single_pair_equals_align_rate():
    pair = (["a", "b"], ["a", "x"])
    assert corpus_rate([pair]) == align(*pair).rate


def test_corpus_rate_pools_rather_than_averages():
    good = (["t"] * 10, ["t"] * 10)
    one_error = (["t"] * 10, ["t"] * 9 + ["x"])
    assert corpus_rate([one_error, good]) == pytest.approx(0.05)


def test_corpus_rate_all_correct():
    assert corpus_rate([(["a"], ["a"]), (["b", "c"], ["b", "c"])]) == 0.0


def test_corpus_rate_empty_ref_pair_counts_insertions():
    assert corpus_rate([(["a"], ["a"]), ([], ["x", "y"])]) == pytest.approx(2.0)


def test_corpus_rate_rejects_all_empty():
    with pytest.raises(ValueError, match="all references"):
        corpus_rate([([], ["a"])])


# ---------------------------------------------------------------- confusions


def test_top_confusions_ranked_then_lexicographic():
    reports = [
        ErrorReport(0, 0, 0, 0, 1, Counter({("m", "n"): 3, ("b", "d"): 3, ("w", "l"): 5})),
        ErrorReport(0, 0, 0, 0, 1, Counter({("m", "n"): 2})),
    ]
    assert top_confusions(reports, 3) == [(("m", "n"), 5), (("w", "l"), 5), (("b", "d"), 3)]
    assert top_confusions(reports, 1) == [(("m", "n"), 5)]


def test_top_confusions_empty():
    assert top_confusions([ErrorReport(0, 0, 0, 2, 2, Counter())], 5) == []


def test_top_confusions_requires_positive_n():
    with pytest.raises(ValueError):
        top_confusions([], 0)


# ---------------------------------------------------------------- trn files


def test_read_trn(tmp_path):
    path = tmp_path / "r.trn"
    path.write_text("the cat sat (utt-1)\n你好 吗 (utt-2)\n\n(utt-3)\n", encoding="utf-8")
    parsed = read_trn(path)
    assert parsed == {"utt-1": "the cat sat", "utt-2": "你好 吗", "utt-3": ""}
    assert list(parsed) == ["utt-1", "utt-2", "utt-3"]


@pytest.mark.parametrize("line", ["no id here", "back(wards) order", "empty ()"])
def test_read_trn_rejects_bad_lines(tmp_path, line):
    path = tmp_path / "bad.trn"
    path.write_text(line + "\n", encoding="utf-8")
    with pytest.raises(TrnFormatError, match="line 1"):
        read_trn(path)


def test_read_trn_rejects_duplicate_ids(tmp_path):
    path = tmp_path / "dup.trn"
    path.write_text("a (u1)\nb (u1)\n", encoding="utf-8")
    with pytest.raises(TrnFormatError, match="u1"):
        read_trn(path)
