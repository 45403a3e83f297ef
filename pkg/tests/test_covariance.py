import math

import numpy as np
import pytest

from covbell.core import (HiddenPoint, MeasurementSetting, Outcome,
                          QuantumState, TimeOrdering, dot, setting_grid)
from covbell.covariance import (FiniteStrategy, NotCovariantError, Side,
                                check_covariance, enumerate_finite,
                                forced_covariant_extension, frame_consistency,
                                reduce_to_local, strategies_to_csv)
from covbell.models import (GisinSingletModel, OrderedModel,
                            StochasticResponse, determinize, eval_pairs,
                            make_gisin_singlet, make_local_sphere)
from covbell.stats import SeedSpec, sample_lambda

AB, BA = TimeOrdering.AB, TimeOrdering.BA
SINGLET = QuantumState.SINGLET
A_X = MeasurementSetting(1, 0, 0)
B_09 = MeasurementSetting(0.9, math.sqrt(1 - 0.81), 0)
B_PERP = MeasurementSetting(0, 1, 0)


def _grid_pairs(n):
    g = setting_grid(n)
    return [(a, b) for a in g for b in g]


def test_covariance_witness_example():
    report = check_covariance(make_gisin_singlet(), SINGLET, [(A_X, B_09)],
                              [HiddenPoint((0.3, 0.4))])
    assert report.checked == 1
    assert report.violations == 1
    w = report.witnesses[0]
    assert w.side is Side.ALICE
    assert w.first_value is Outcome.PLUS
    assert w.second_value is Outcome.MINUS


def test_local_sphere_is_covariant():
    lams = sample_lambda(2, 500, SeedSpec(41))
    report = check_covariance(make_local_sphere(), SINGLET, _grid_pairs(4), lams)
    assert report.violations == 0
    assert report.violation_fraction == 0.0


def _gisin_disagreement_fraction(a, b, grid=500):
    """Independent oracle: measure of the covariance-disagreement set on the
    unit square, branch rules re-derived inline from the threshold model."""
    c = dot(a, b)
    mids = (np.arange(grid) + 0.5) / grid
    r_a, r_b = np.meshgrid(mids, mids, indexing="ij")
    f_ab = r_a <= 0.5
    s_ba = np.where(r_b <= 0.5, r_a <= (1 - c) / 2, r_a <= (1 + c) / 2)
    f_ba = r_b <= 0.5
    s_ab = np.where(r_a <= 0.5, r_b <= (1 - c) / 2, r_b <= (1 + c) / 2)
    return float(np.mean((f_ab != s_ba) | (f_ba != s_ab)))


def test_gisin_violation_fraction_matches_quadrature_oracle():
    pairs = _grid_pairs(5)
    lams = sample_lambda(2, 400, SeedSpec(7))
    report = check_covariance(make_gisin_singlet(), SINGLET, pairs, lams,
                              witness_cap=8)
    assert report.checked == 10_000
    assert report.violation_fraction > 0.05
    expected = np.mean([_gisin_disagreement_fraction(a, b) for a, b in pairs])
    assert report.violation_fraction == pytest.approx(expected, abs=0.02)


def test_gisin_alice_side_disagreement_measure_closed_form():
    # per side the disagreement measure is |a.b| / 2
    c = dot(A_X, B_09)
    grid = 2000
    mids = (np.arange(grid) + 0.5) / grid
    r_a, r_b = np.meshgrid(mids, mids, indexing="ij")
    f_ab = r_a <= 0.5
    s_ba = np.where(r_b <= 0.5, r_a <= (1 - c) / 2, r_a <= (1 + c) / 2)
    assert np.mean(f_ab != s_ba) == pytest.approx(c / 2, abs=1e-3)


def test_witness_cap_respected():
    lams = sample_lambda(2, 2000, SeedSpec(42))
    report = check_covariance(make_gisin_singlet(), SINGLET, [(A_X, B_09)],
                              lams, witness_cap=5)
    assert len(report.witnesses) == 5
    assert report.violations > 5


def test_reduce_local_sphere_succeeds_and_is_sound():
    m = make_local_sphere()
    pairs = _grid_pairs(3)
    lams = sample_lambda(2, 300, SeedSpec(43))
    view = reduce_to_local(m, SINGLET, pairs, lams)
    for a, b in pairs:
        va = view.responds_alice_values(a, lams)
        vb = view.responds_bob_values(b, lams)
        for ordering in (AB, BA):
            alphas, betas = eval_pairs(m, ordering, SINGLET, a, b, lams)
            assert np.array_equal(va, alphas)
            assert np.array_equal(vb, betas)


def test_reduce_gisin_fails_with_witness():
    lams = sample_lambda(2, 200, SeedSpec(44))
    with pytest.raises(NotCovariantError) as err:
        reduce_to_local(make_gisin_singlet(), SINGLET, _grid_pairs(3), lams)
    assert err.value.witness.side in (Side.ALICE, Side.BOB)
    assert err.value.report.violations > 0


def test_reduce_fully_random_determinized_model():
    sr = StochasticResponse(
        lambda_dim=0,
        p_first=lambda o, s, sf, lams: np.full(lams.shape[0], 0.5),
        p_second=lambda o, s, a, b, f, lams: np.full(lams.shape[0], 0.5),
        name="coin",
    )
    m = determinize(sr)
    pairs = _grid_pairs(3)
    lams = sample_lambda(m.lambda_dim, 20_000, SeedSpec(45))
    view = reduce_to_local(m, SINGLET, pairs, lams)
    for a, b in pairs:
        prod = view.responds_alice_values(a, lams) * view.responds_bob_values(b, lams)
        assert abs(np.mean(prod)) < 0.02


def test_local_view_model_is_covariant():
    view = reduce_to_local(make_local_sphere(), SINGLET, _grid_pairs(3),
                           sample_lambda(2, 100, SeedSpec(46)))
    induced = view.as_ordered_model()
    lams = sample_lambda(2, 500, SeedSpec(47))
    report = check_covariance(induced, SINGLET, _grid_pairs(4), lams)
    assert report.violations == 0


def test_enumeration_counts_and_bounds():
    summary = enumerate_finite()
    assert summary.total == 4096
    assert summary.covariant == 16
    assert summary.max_abs_s == 4
    assert summary.max_abs_s_covariant == 2


def test_enumeration_covariant_set_equals_forced_extensions():
    summary = enumerate_finite()
    scanned = {row.index for row in summary.rows if row.covariant}
    forced = set()
    for bits in range(16):
        f_ab = tuple(1 - 2 * ((bits >> i) & 1) for i in range(2))
        f_ba = tuple(1 - 2 * ((bits >> (2 + i)) & 1) for i in range(2))
        forced.add(forced_covariant_extension(f_ab, f_ba).index)
    assert scanned == forced


def test_covariant_strategies_frame_invariant_tables():
    for row in enumerate_finite().rows:
        strat = FiniteStrategy.from_index(row.index)
        if row.covariant:
            assert strat.correlation_table(AB) == strat.correlation_table(BA)
            assert row.s_ab == row.s_ba


def test_pr_box_strategy_reaches_four():
    # f_ab = +1, s_ab anticorrelated only at (1,1), covariance ignored
    strat = FiniteStrategy(f_ab=(1, 1), s_ab=(1, 1, 1, -1),
                           f_ba=(1, 1), s_ba=(1, 1, 1, 1))
    assert strat.chsh(AB) == 4
    assert not strat.covariant


def test_strategy_index_roundtrip():
    for index in (0, 1, 17, 2048, 4095):
        assert FiniteStrategy.from_index(index).index == index


def test_enumeration_multi_atom_not_supported():
    with pytest.raises(ValueError, match="convexity"):
        enumerate_finite(lambda_atoms=2)


def test_strategies_csv_shape():
    text = strategies_to_csv(enumerate_finite())
    lines = text.strip().splitlines()
    assert lines[0] == "id,covariant,S_AB,S_BA"
    assert len(lines) == 4097


class _FrameAsymmetricModel(OrderedModel):
    """AB frame follows the singlet threshold rules, BA answers +1 always."""

    lambda_dim = 2
    name = "frame-asymmetric"

    def __init__(self):
        self._gisin = GisinSingletModel()

    def first_values(self, ordering, state, setting_first, lams):
        if ordering is AB:
            return self._gisin.first_values(ordering, state, setting_first, lams)
        return np.ones(lams.shape[0], dtype=np.int8)

    def second_values(self, ordering, state, a, b, lams):
        if ordering is AB:
            return self._gisin.second_values(ordering, state, a, b, lams)
        return np.ones(lams.shape[0], dtype=np.int8)


def test_frame_consistency_gisin_small():
    assert frame_consistency(make_gisin_singlet(), SINGLET, A_X, B_09,
                             grid=2000) <= 2e-3


def test_frame_consistency_sphere_zero():
    assert frame_consistency(make_local_sphere(), SINGLET, A_X, B_09,
                             grid=500) <= 1e-12


def test_frame_consistency_detects_asymmetric_model():
    assert frame_consistency(_FrameAsymmetricModel(), SINGLET, A_X, B_PERP,
                             grid=500) >= 0.2
