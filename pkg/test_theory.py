import pytest

from mollifem.theory import (
    RegimeParams,
    Strategy,
    beta_star,
    error_bound,
    lambda_max,
    maximal_gain,
    maximal_gain_lambda,
    optimal_error_bound,
    predicted_gamma,
    recommend_strategy,
    regime,
    theory_curves,
)


@pytest.mark.parametrize("h,s_r", [(0.1, 1), (0.01, 2), (0.05, 3)])
def test_beta_star_equals_h_at_the_crossover(h, s_r):
    assert beta_star(h ** s_r, h, s_r) == pytest.approx(h)


def test_beta_star_values():
    assert beta_star(0.01 ** 2, 0.01, 1) == pytest.approx(4.6416e-4, rel=1e-4)
    assert beta_star(1.0, 0.1, 2) == pytest.approx(0.63096, rel=1e-4)


def test_beta_star_rejects_nonpositive_inputs():
    with pytest.raises(ValueError):
        beta_star(0.0, 0.1, 1)


@pytest.mark.parametrize(
    "args,expected",
    [((2, 1, 1), 2.5), ((3, 2, 2), 3.5), ((3, 2, 1), 3.25), ((2, 2, 1), 2.0), ((3, 1, 1), 4.0)],
)
def test_lambda_max(args, expected):
    assert lambda_max(*args) == pytest.approx(expected)


def test_predicted_gamma_examples():
    noreg, reg = predicted_gamma(RegimeParams(s_a=2, s_r=1, d=1, lam=1.0))
    assert (noreg, reg.value, reg.exact) == (pytest.approx(1.0), pytest.approx(1.0), True)

    noreg, reg = predicted_gamma(RegimeParams(s_a=3, s_r=2, d=1, lam=2.0))
    assert noreg == pytest.approx(2.0)
    assert reg.value == pytest.approx(2.0) and reg.exact

    noreg, reg = predicted_gamma(RegimeParams(s_a=3, s_r=2, d=1, lam=4.0))
    assert noreg == pytest.approx(3.0)
    assert reg.value == pytest.approx(3.0) and reg.lower_bound_only


def test_exact_branch_reaches_lambda_max():
    lam_m = lambda_max(2, 1)
    _, reg = predicted_gamma(RegimeParams(2, 1, 1, lam_m))
    assert reg.exact
    assert reg.value == pytest.approx(2.0)


@pytest.mark.parametrize("s_a,s_r", [(2, 1), (3, 1), (3, 2), (2, 2)])
def test_plain_rate_is_nondecreasing_and_capped(s_a, s_r):
    lambdas = [0.25 * k for k in range(21)]
    rates = [predicted_gamma(RegimeParams(s_a, s_r, 1, lam))[0] for lam in lambdas]
    assert all(b >= a for a, b in zip(rates, rates[1:]))
    assert max(rates) == s_a


@pytest.mark.parametrize("s_a,s_r", [(2, 1), (3, 1), (3, 2)])
def test_maximal_gain_at_lambda_equal_s_a(s_a, s_r):
    gaps = {}
    for k in range(41):
        lam = 0.125 * k
        noreg, reg = predicted_gamma(RegimeParams(s_a, s_r, 1, lam))
        if reg.exact:
            gaps[lam] = noreg - reg.value
    best = max(gaps, key=gaps.get)
    assert best == maximal_gain_lambda(s_a)
    assert gaps[best] == pytest.approx(maximal_gain(s_a, s_r))


@pytest.mark.parametrize(
    "lam,s_a,s_r,expected",
    [
        (0.5, 2, 1, Strategy.REGULARISE),
        (1.5, 2, 1, Strategy.DONT_REGULARISE),
        (3.0, 2, 2, Strategy.EITHER),
        (1.0, 2, 2, Strategy.REGULARISE),
        (1.0, 2, 1, Strategy.EITHER),   # lambda = s_r
        (2.5, 2, 1, Strategy.EITHER),   # lambda = lambda_M
        (4.5, 2, 1, Strategy.EITHER),
    ],
)
def test_recommend_strategy(lam, s_a, s_r, expected):
    assert recommend_strategy(RegimeParams(s_a, s_r, 1, lam)) is expected


def test_strategy_values_are_the_reported_labels():
    assert Strategy.EITHER.value == "EitherRegularisePreferred"
    assert Strategy.DONT_REGULARISE.value == "DontRegularise"


@pytest.mark.parametrize(
    "lam,s_a,s_r,expected",
    [
        (1.0, 2, 2, "regularisation-dominant"),
        (1.5, 2, 1, "noise-dominated"),
        (2.25, 2, 1, "intermediate"),
        (3.0, 2, 1, "discretisation-dominated"),
    ],
)
def test_regime_names(lam, s_a, s_r, expected):
    assert regime(RegimeParams(s_a, s_r, 1, lam)) == expected


def test_regime_params_validation():
    with pytest.raises(ValueError):
        RegimeParams(0, 1)
    with pytest.raises(ValueError):
        RegimeParams(2, 1, 1, -0.5)


def test_optimal_bound_is_attained_by_beta_star_up_to_a_factor():
    h, s_a, s_r = 0.01, 2, 1
    for sigma in (1.0, 0.1, 0.05):
        best = optimal_error_bound(sigma, h, s_a, s_r)
        at_beta_star = error_bound(beta_star(sigma, h, s_r), sigma, h, s_a, s_r)
        assert at_beta_star == pytest.approx(2 * best - h ** s_a)


def test_error_bound_without_regularisation():
    assert error_bound(0.0, 0.1, 0.01, 2, 1) == pytest.approx(0.1 + 1e-4)
    assert optimal_error_bound(1e-5, 0.01, 2, 1) == pytest.approx(1e-5 + 1e-4)


def test_curve_tables():
    frame = theory_curves(2, 1, 1, [1.0]).to_frame()
    assert list(frame.columns) == ["lambda", "gamma_theory_noreg", "gamma_theory_reg", "lower_bound_only"]
    assert frame.loc[0, "gamma_theory_noreg"] == pytest.approx(1.0)
    assert frame.loc[0, "gamma_theory_reg"] == pytest.approx(1.0)

    frame = theory_curves(3, 2, 1, [0.0, 4.0]).to_frame()
    assert frame.loc[0, "gamma_theory_reg"] == pytest.approx(0.4)
    assert bool(frame.loc[1, "lower_bound_only"])
