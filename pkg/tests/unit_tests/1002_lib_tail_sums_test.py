# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import math

import pytest

import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_measures as lfv_measures

parse = lfv_measures.parse_measure


def test_01_kingman_tail_sums_telescope():
    tail = lfv_measures.tail_sums(parse('delta0:1'), 10, 2000)

    assert tail.extrapolated('lambda_b') == pytest.approx(0.2, rel=1e-12)
    assert tail.extrapolated('gamma_b') == pytest.approx(0.2, rel=1e-12)
    assert tail.truncated('gamma_bm') == pytest.approx(0.2 - 2.0 / 2000,
                                                       rel=1e-12)


def test_02_kingman_mass_scales_the_tail():
    tail = lfv_measures.tail_sums(parse('delta0:4'), 10, 500)

    assert tail.extrapolated('lambda_b') == pytest.approx(0.05, rel=1e-12)


def test_03_beta_tail_sums_are_finite_and_decrease():
    beta = parse('beta:1.5')
    sums = [
        lfv_measures.tail_sums(beta, m, 2000).extrapolated('gamma_bm')
        for m in (10, 20, 40)
    ]

    assert all(math.isfinite(s) and s > 0.0 for s in sums)
    assert sums[0] > sums[1] > sums[2]
    assert sums[0] / sums[1] == pytest.approx(math.sqrt(2.0), rel=0.2)


def test_04_tail_sums_domain():
    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_measures.tail_sums(parse('delta0:1'), 1, 100)

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_measures.tail_sums(parse('delta0:1'), 10, 10)


def test_05_zero_measure_is_degenerate():
    with pytest.raises(lfv_exceptions.DegenerateMeasure) as err:
        lfv_measures.tail_sums(parse('zero'), 5, 100)

    assert err.value.exit_code == 3


def test_06_fit_alpha_kingman():
    fit = lfv_measures.fit_alpha(parse('delta0:1'),
                                 lfv_measures.DEFAULT_M_GRID)

    assert fit.fitted
    assert fit.alpha == pytest.approx(1.0, abs=0.05)
    assert fit.constant == pytest.approx(2.0, rel=0.05)


def test_07_fit_alpha_beta():
    fit = lfv_measures.fit_alpha(parse('beta:1.5'),
                                 lfv_measures.DEFAULT_M_GRID)

    assert fit.fitted
    assert fit.alpha == pytest.approx(0.5, abs=0.1)


def test_08_fit_alpha_refuses_stays_infinite():
    fit = lfv_measures.fit_alpha(parse('beta:0.8'),
                                 lfv_measures.DEFAULT_M_GRID)

    assert not fit.fitted
    assert fit.hint == lfv_measures.STAYS_INFINITE


def test_09_fit_alpha_grid_validation():
    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_measures.fit_alpha(parse('delta0:1'), [4, 8, 16])

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_measures.fit_alpha(parse('delta0:1'), [4, 8, 8, 16])


@pytest.mark.parametrize('spec, expected', [
    ('delta0:1', lfv_measures.COMES_DOWN),
    ('delta1:1', lfv_measures.NEITHER),
    ('beta:1.5', lfv_measures.COMES_DOWN),
    ('beta:0.8', lfv_measures.STAYS_INFINITE),
    ('powerlaw:c=1,gamma=0.5,eps=0.5', lfv_measures.COMES_DOWN),
    ('mix:delta1=1+beta=0.8', lfv_measures.NEITHER),
    ('mix:delta0=0.1+beta=0.8', lfv_measures.COMES_DOWN)
])
def test_10_classification(spec, expected):
    report = lfv_measures.classify_cdi(parse(spec), fit=False)

    assert report.classification == expected
    assert report.method.startswith('analytic')


def test_11_table_density_uses_partial_sums():
    # no mass near 0: γ_b grows linearly and Σ γ_b^-1 diverges
    report = lfv_measures.classify_cdi(
        parse('table:edges=0.3;1,values=1'), fit=False
    )

    assert report.method.startswith('numeric')
    assert report.classification == lfv_measures.STAYS_INFINITE
    assert report.partial_sums[2000] > report.partial_sums[1000]


def test_12_uniform_density_is_inconclusive():
    # γ_b ~ b log b sits between the two partial-sum thresholds
    report = lfv_measures.classify_cdi(
        parse('table:edges=0;1,values=1'), fit=False
    )

    assert report.classification == lfv_measures.INCONCLUSIVE


def test_13_cdi_report_carries_the_fit():
    report = lfv_measures.classify_cdi(parse('delta0:1'))

    assert report.alpha == pytest.approx(1.0, abs=0.05)
    assert report.to_dict()['classification'] == lfv_measures.COMES_DOWN


def test_14_cg_constant():
    assert lfv_measures.cg_constant(1.0, 0.5, 0.5) == pytest.approx(
        0.2596, abs=5e-4
    )
    assert lfv_measures.cg_constant(1.0, 0.01, 0.5) == pytest.approx(
        0.243, abs=0.01
    )


def test_15_cg_lower_bound_holds_for_the_powerlaw():
    report = lfv_measures.cg_lower_bound_check(1.0, 0.5, 0.5, 200)

    assert report.passed
    assert report.min_ratio >= report.constant

    for m, (bound, tail) in report.tails.items():
        assert tail <= bound


def test_16_beta_dominates_its_powerlaw():
    c, gamma, eps = lfv_measures.beta_cg_parameters(1.5)
    report = lfv_measures.cg_lower_bound_check(
        c, gamma, eps, 100, measure=parse('beta:1.5')
    )

    assert gamma == pytest.approx(0.5)
    assert report.passed
