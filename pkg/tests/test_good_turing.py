import math

import pytest

from smoothlm.counts import CountOfCounts
from smoothlm.good_turing import (
    GoodTuringError,
    fit_simple_good_turing,
    gt_adjusted_count,
    raw_adjusted_counts,
)

# Count-of-counts of the prosody corpus used as the worked example by the
# smoothing technique this estimator follows.
PROSODY = {
    1: 120, 2: 40, 3: 24, 4: 13, 5: 15, 6: 5, 7: 11, 8: 2, 9: 2, 10: 1,
    12: 3, 14: 2, 15: 1, 16: 1, 17: 3, 19: 1, 20: 3, 21: 2, 23: 3, 24: 3,
    25: 3, 26: 2, 27: 2, 28: 1, 31: 2, 32: 2, 33: 1, 34: 2, 36: 2, 41: 3,
    43: 1, 45: 3, 46: 1, 47: 1, 50: 1, 71: 1, 84: 1, 101: 1, 105: 1,
    121: 1, 124: 1, 146: 1, 162: 1, 193: 1, 199: 1, 224: 1, 226: 1,
    254: 1, 257: 1, 339: 1, 421: 1, 456: 1, 481: 1, 483: 1, 1140: 1,
    1256: 1, 1322: 1, 1530: 1, 2131: 1, 2395: 1, 6925: 1, 7846: 1,
}

# Frozen from an independent regression oracle run on the table above
# before this module was written (notes kept outside the package); the
# published worked-example figure for r = 1 is 0.7628.
PROSODY_EXPECTED = {
    1: 0.7634609902436857,
    2: 1.7079088897777959,
    3: 2.682090343857914,
    4: 3.6671256063287534,
    5: 4.657350396807441,
    6: 5.650461685626448,
    7: 6.645344558220439,
    8: 7.641393111260261,
    9: 8.638249590463891,
    10: 9.635689104037922,
    12: 11.631769777160942,
    50: 49.61595146385208,
    7846: 7845.6106608199,
}
PROSODY_SLOPE = -1.3893736518400555
PROSODY_INTERCEPT = 4.468558153807489


class TestRawAdjustedCount:
    def test_direct_formula(self):
        coc = CountOfCounts({1: 10, 2: 5})
        assert gt_adjusted_count(coc, 1) == pytest.approx(1.0, abs=0)

    def test_zero_next(self):
        coc = CountOfCounts({1: 10})
        assert gt_adjusted_count(coc, 1) == 0.0

    def test_undefined_row(self):
        with pytest.raises(GoodTuringError):
            gt_adjusted_count(CountOfCounts({2: 4}), 1)

    def test_telescoping_mass_identity(self):
        # sum over r >= 0 of n_r r*(r) telescopes to sum of r n_r exactly.
        coc = CountOfCounts({1: 3, 2: 3}, n_zero=6)
        total = coc.n_zero * (1 * coc.n(1) / coc.n_zero)
        for r, n_r in coc.rows():
            total += n_r * gt_adjusted_count(coc, r)
        assert total == coc.token_mass() == 9

    def test_telescoping_identity_general(self):
        # Gap-free ranks: every token of mass reappears one rank down.
        coc = CountOfCounts({1: 100, 2: 40, 3: 17, 4: 8, 5: 2}, n_zero=1000)
        lhs = coc.n_zero * (coc.n(1) / coc.n_zero)
        lhs += sum(n * gt_adjusted_count(coc, r) for r, n in coc.rows())
        assert lhs == sum(r * n for r, n in coc.rows())

    def test_telescoping_identity_with_gaps(self):
        # With gaps the identity is the raw reindexing over all r >= 0.
        coc = CountOfCounts({1: 100, 2: 40, 3: 17, 4: 8, 7: 2})
        top = max(coc.counts)
        lhs = sum((r + 1) * coc.n(r + 1) for r in range(0, top))
        assert lhs == sum(r * n for r, n in coc.rows())


class TestSimpleGoodTuringFit:
    def test_exact_power_law_recovery(self):
        # n_r = 3600 r^-2 exactly on consecutive ranks: the Z transform is
        # the identity there, so the fitted line reproduces the data.
        coc = CountOfCounts({1: 3600, 2: 900, 3: 400, 4: 225, 5: 144, 6: 100})
        est = fit_simple_good_turing(coc)
        assert est.slope == pytest.approx(-2.0, abs=1e-6)
        for r, n in coc.rows():
            assert est.smoothed_nr(r) == pytest.approx(n, rel=1e-6)

    def test_two_point_slope(self):
        est = fit_simple_good_turing(CountOfCounts({1: 100, 2: 25}))
        assert est.slope == pytest.approx(-2.0, abs=1e-12)

    def test_single_row_rejected(self):
        with pytest.raises(GoodTuringError):
            fit_simple_good_turing(CountOfCounts({3: 10}))

    def test_prosody_regression_line(self):
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        assert est.slope == pytest.approx(PROSODY_SLOPE, abs=1e-9)
        assert est.intercept == pytest.approx(PROSODY_INTERCEPT, abs=1e-9)

    def test_prosody_adjusted_counts(self):
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        for r, expected in PROSODY_EXPECTED.items():
            assert est.adjusted_count(r) == pytest.approx(expected, abs=1e-9)

    def test_prosody_published_anchor(self):
        # The worked example's published r*(1).
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        assert est.adjusted_count(1) == pytest.approx(0.7628, abs=1e-3)

    def test_prosody_p0(self):
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        assert est.total == 30902
        assert est.p0 == pytest.approx(120 / 30902, abs=1e-12)

    def test_mass_renormalization(self):
        # p0 plus the renormalized seen mass is exactly one.
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        seen = math.fsum(n * est.prob_for_count(r) for r, n in est.rows)
        assert seen + est.p0 == pytest.approx(1.0, abs=1e-9)

    def test_mass_renormalization_small(self):
        est = fit_simple_good_turing(CountOfCounts({1: 50, 2: 20, 3: 9, 5: 2}))
        seen = math.fsum(n * est.prob_for_count(r) for r, n in est.rows)
        assert seen + est.p0 == pytest.approx(1.0, abs=1e-9)

    def test_switch_is_permanent(self):
        est = fit_simple_good_turing(CountOfCounts(PROSODY))
        smoothed_regime = [r for r, _ in est.rows if r >= est.switch_r]
        for r in smoothed_regime:
            lgt = (r + 1) * est.smoothed_nr(r + 1) / est.smoothed_nr(r)
            assert est.adjusted_count(r) == pytest.approx(lgt, rel=1e-12)

    def test_unknown_count_raises(self):
        est = fit_simple_good_turing(CountOfCounts({1: 10, 2: 5}))
        with pytest.raises(GoodTuringError):
            est.adjusted_count(7)


def test_raw_fallback_keeps_counts_at_gaps():
    # The model-side fallback never zeroes a seen gram: wherever
    # n_{r+1} = 0 the raw count is kept.
    adjusted = raw_adjusted_counts(CountOfCounts({1: 4, 3: 2}))
    assert adjusted[3] == 3.0
    assert adjusted[1] == 1.0
    assert raw_adjusted_counts(CountOfCounts({1: 10, 2: 5}))[1] == 1.0
