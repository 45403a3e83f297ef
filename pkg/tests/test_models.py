import math

import numpy as np
import pytest

from covbell.core import (HiddenPoint, MeasurementSetting, Outcome,
                          QuantumState, TimeOrdering, dot, setting_grid)
from covbell.models import (GisinSingletModel, LocalSphereModel, OutcomePair,
                            StochasticResponse, determinize, eval_pair,
                            make_gisin_singlet, make_local_sphere, make_model,
                            stochastic_singlet)
from covbell.stats import SeedSpec, correlator, estimate_joint, exact_joint, sample_lambda

AB, BA = TimeOrdering.AB, TimeOrdering.BA
SINGLET = QuantumState.SINGLET

A_X = MeasurementSetting(1, 0, 0)
B_09 = MeasurementSetting(0.9, math.sqrt(1 - 0.81), 0)  # a.b = 0.9


def test_gisin_eval_ab_examples():
    m = make_gisin_singlet()
    pair = eval_pair(m, AB, SINGLET, A_X, B_09, HiddenPoint((0.3, 0.6)))
    assert pair == OutcomePair(Outcome.PLUS, Outcome.MINUS)
    pair = eval_pair(m, AB, SINGLET, A_X, B_09, HiddenPoint((0.7, 0.9)))
    assert pair == OutcomePair(Outcome.MINUS, Outcome.PLUS)


def test_gisin_perfect_anticorrelation_equal_settings():
    m = make_gisin_singlet()
    rng = np.random.default_rng(5)
    for ordering in (AB, BA):
        for _ in range(200):
            lam = HiddenPoint(tuple(rng.random(2)))
            pair = eval_pair(m, ordering, SINGLET, A_X, A_X, lam)
            assert int(pair.alpha) * int(pair.beta) == -1


def test_gisin_first_ab_threshold():
    m = make_gisin_singlet()
    assert m.first(AB, SINGLET, A_X, HiddenPoint((0.3, 0.6))) is Outcome.PLUS
    assert m.first(AB, SINGLET, A_X, HiddenPoint((0.6, 0.6))) is Outcome.MINUS


def test_gisin_ba_role_swap_witness_pair():
    # this lambda is a covariance-violation witness: S_BA != F_AB
    m = make_gisin_singlet()
    lam = HiddenPoint((0.3, 0.4))
    assert m.second(BA, SINGLET, A_X, B_09, lam) is Outcome.MINUS
    assert m.first(BA, SINGLET, B_09, lam) is Outcome.PLUS
    assert m.first(AB, SINGLET, A_X, lam) is Outcome.PLUS


def test_gisin_marginals_are_half():
    m = make_gisin_singlet()
    for ordering in (AB, BA):
        table = exact_joint(m, ordering, SINGLET, A_X, B_09, grid=1000)
        p_alpha_plus = table.probs[0, 0] + table.probs[0, 1]
        p_beta_plus = table.probs[0, 0] + table.probs[1, 0]
        assert p_alpha_plus == pytest.approx(0.5, abs=1e-12)
        assert p_beta_plus == pytest.approx(0.5, abs=1e-12)


def test_purity_identical_inputs_identical_outputs():
    rng = np.random.default_rng(6)
    for name in ("gisin-singlet", "local-sphere", "determinized-singlet"):
        m = make_model(name)
        for ordering in (AB, BA):
            lam = HiddenPoint(tuple(rng.random(m.lambda_dim)))
            p1 = eval_pair(m, ordering, SINGLET, A_X, B_09, lam)
            p2 = eval_pair(m, ordering, SINGLET, A_X, B_09, lam)
            assert p1 == p2


def test_lambda_dimension_mismatch_rejected():
    m = make_gisin_singlet()
    with pytest.raises(ValueError, match="lambda dimension"):
        eval_pair(m, AB, SINGLET, A_X, B_09, HiddenPoint((0.5,)))


def test_sphere_positive_projection():
    m = make_local_sphere()
    # (u, v) = (1, 0) maps to the +z direction
    lam = HiddenPoint((1.0, 0.0))
    z = MeasurementSetting(0, 0, 1)
    assert m.first(AB, SINGLET, z, lam) is Outcome.PLUS


def test_sphere_anticorrelated_at_equal_settings():
    m = make_local_sphere()
    lams = sample_lambda(2, 2000, SeedSpec(21))
    for ordering in (AB, BA):
        alphas = (m.first_values(ordering, SINGLET, A_X, lams)
                  if ordering is AB else
                  m.second_values(ordering, SINGLET, A_X, A_X, lams))
        betas = (m.second_values(ordering, SINGLET, A_X, A_X, lams)
                 if ordering is AB else
                 m.first_values(ordering, SINGLET, A_X, lams))
        assert np.all(alphas * betas == -1)


def test_sphere_second_ignores_other_setting():
    m = make_local_sphere()
    lams = sample_lambda(2, 50, SeedSpec(22))
    b = B_09
    vals = [m.second_values(AB, SINGLET, a, b, lams) for a in setting_grid(20)]
    for v in vals[1:]:
        assert np.array_equal(v, vals[0])
    vals = [m.second_values(BA, SINGLET, A_X, b, lams) for b in setting_grid(20)]
    for v in vals[1:]:
        assert np.array_equal(v, vals[0])


def _sphere_quadrature_correlator(a, b, grid=800):
    """Independent oracle: midpoint quadrature of the sphere-model product
    over the (u, v) unit square, with the sign rules re-derived inline."""
    mids = (np.arange(grid) + 0.5) / grid
    u, v = np.meshgrid(mids, mids, indexing="ij")
    cos_t = 2.0 * u - 1.0
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    phi = 2.0 * np.pi * v
    lam = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1)
    alice = np.where(lam @ a.as_array() >= 0, 1, -1)
    bob = -np.where(lam @ b.as_array() >= 0, 1, -1)
    return float(np.mean(alice * bob))


@pytest.mark.parametrize("b", [B_09, MeasurementSetting(0, 0, 1),
                               MeasurementSetting(-0.5, math.sqrt(0.75), 0)])
def test_sphere_correlator_matches_classical_value(b):
    theta = math.acos(dot(A_X, b))
    analytic = -1.0 + 2.0 * theta / math.pi
    assert _sphere_quadrature_correlator(A_X, b) == pytest.approx(analytic, abs=5e-3)
    m = make_local_sphere()
    table = estimate_joint(m, AB, SINGLET, A_X, b, 1_000_000, SeedSpec(23))
    assert correlator(table).value == pytest.approx(analytic, abs=5e-3)


def _constant_response(p1, p2, dim=0):
    return StochasticResponse(
        lambda_dim=dim,
        p_first=lambda o, s, sf, lams: np.full(lams.shape[0], p1),
        p_second=lambda o, s, a, b, f, lams: np.full(lams.shape[0], p2),
        name="constant",
    )


def test_determinize_threshold_examples():
    m = determinize(_constant_response(0.25, 0.5))
    assert m.lambda_dim == 2
    assert m.first(AB, SINGLET, A_X, HiddenPoint((0.2, 0.0))) is Outcome.PLUS
    assert m.first(AB, SINGLET, A_X, HiddenPoint((0.3, 0.0))) is Outcome.MINUS


def test_determinize_first_mean_matches_probability():
    for p in (0.1, 0.5, 0.8):
        m = determinize(_constant_response(p, 0.5))
        lams = sample_lambda(2, 200_000, SeedSpec(31))
        vals = m.first_values(AB, SINGLET, A_X, lams)
        assert np.mean(vals) == pytest.approx(2 * p - 1, abs=5e-3)


def test_determinized_singlet_matches_gisin_joint():
    det = determinize(stochastic_singlet())
    gisin = make_gisin_singlet()
    for ordering in (AB, BA):
        t_det = estimate_joint(det, ordering, SINGLET, A_X, B_09, 1_000_000, SeedSpec(33))
        t_gis = exact_joint(gisin, ordering, SINGLET, A_X, B_09, grid=1000)
        assert np.allclose(t_det.probs, t_gis.probs, atol=5e-3)


def test_probability_out_of_range_rejected():
    m = determinize(_constant_response(1.5, 0.5))
    with pytest.raises(ValueError, match="probability"):
        m.first(AB, SINGLET, A_X, HiddenPoint((0.2, 0.0)))


def test_unknown_model_name():
    with pytest.raises(KeyError, match="unknown model"):
        make_model("nope")


def test_models_require_singlet_state():
    m = make_gisin_singlet()
    with pytest.raises(ValueError, match="singlet"):
        m.first(AB, "not-a-state", A_X, HiddenPoint((0.1, 0.1)))
