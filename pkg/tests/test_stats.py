import collections
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special, stats as sps

from batchopt.core import Partition
from batchopt.evaluation import objective
from batchopt.stats import (BivariateFit, DegenerateSampleError, EmpiricalCdf, McrpScore,
                            SampleSeries, SamplingConfig, conditional_mean,
                            conditional_upper_bound, empirical_conditional, fit_arrays,
                            fit_bivariate, kolmogorov_sf, ks_normality_test, mcrp_score,
                            norm_ppf, read_series_csv, sample_objectives, write_series_csv)
from batchopt.generator import GeneratorConfig, generate_instance
from conftest import make_instance


@pytest.mark.parametrize("lam", [0.05, 0.3, 0.6, 0.9, 0.99, 1.0, 1.2, 1.5, 2.5, 4.0])
def test_kolmogorov_sf_against_scipy(lam):
    assert kolmogorov_sf(lam) == pytest.approx(special.kolmogorov(lam), abs=1e-12)


@given(st.floats(1e-12, 1 - 1e-12))
def test_norm_ppf_accuracy(p):
    assert norm_ppf(p) == pytest.approx(sps.norm.ppf(p), abs=1e-9, rel=1e-9)


def test_ks_statistic_matches_reference():
    x = np.random.default_rng(5).normal(3, 2, size=500)
    d, p = ks_normality_test(x)
    ref = sps.kstest(x, "norm", args=(x.mean(), x.std(ddof=1)))
    assert d == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(special.kolmogorov(math.sqrt(500) * d), abs=1e-12)


def test_ks_accepts_normal_samples():
    passes = sum(ks_normality_test(np.random.default_rng(s).normal(size=5000))[1] > 0.05
                 for s in range(40))
    assert passes >= 38


def test_ks_rejects_two_point():
    d, p = ks_normality_test([0.0, 1.0] * 50)
    assert d == pytest.approx(0.5 - sps.norm.cdf(-0.5 / np.std([0.0, 1.0] * 50, ddof=1)), abs=1e-12)
    assert p < 0.01


def test_ks_constant_column():
    with pytest.raises(DegenerateSampleError, match="degenerate sample"):
        ks_normality_test([2.0] * 20)
    with pytest.raises(ValueError):
        ks_normality_test([1.0, 2.0, 3.0])


def test_fit_identity():
    x = np.arange(10.0)
    assert fit_arrays(x, x).rho == pytest.approx(1.0)


def test_fit_independent_coins():
    rng = np.random.default_rng(11)
    fit = fit_arrays(rng.normal(size=5000), rng.integers(0, 2, size=5000))
    assert abs(fit.rho) < 0.1


def test_fit_two_points():
    fit = fit_arrays([0.0, 1.0], [0.0, 1.0])
    assert (fit.mu_x, fit.mu_y) == (0.5, 0.5)
    assert fit.rho == pytest.approx(1.0)


def test_fit_degenerate():
    with pytest.raises(DegenerateSampleError):
        fit_arrays([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


@given(st.integers(0, 10**6), st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10))
def test_pearson_affine_invariance(seed, a, b, c):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=50)
    y = x + rng.normal(size=50)
    assert fit_arrays(a * x + b, c * y - b).rho == pytest.approx(fit_arrays(x, y).rho, abs=1e-9)


def fit_of(mu_x=10.0, mu_y=0.0, sx=2.0, sy=1.0, rho=0.5):
    return BivariateFit(mu_x, mu_y, sx, sy, rho)


def test_conditional_mean_examples():
    assert conditional_mean(fit_of(rho=0.0), 7.0) == 10.0
    assert conditional_mean(fit_of(), 0.0) == 10.0
    assert conditional_mean(fit_of(), 2.0) == pytest.approx(12.0)
    with pytest.raises(DegenerateSampleError):
        conditional_mean(fit_of(sy=0.0), 1.0)


def test_upper_bound_examples():
    f = fit_of(rho=0.6)
    assert conditional_upper_bound(f, 1.3, 0.5) == pytest.approx(conditional_mean(f, 1.3), abs=1e-12)
    z = conditional_upper_bound(fit_of(rho=0.0), 0.0, 0.1587)
    assert z == pytest.approx(12.0, abs=2e-3)
    with pytest.raises(DegenerateSampleError):
        conditional_upper_bound(fit_of(rho=1.0), 0.0, 0.1)


@given(st.floats(-3, 3), st.floats(0.01, 0.5), st.floats(0.01, 2))
def test_bound_monotone(y0, alpha, step):
    f = fit_of(rho=0.7)
    assert conditional_upper_bound(f, y0 + step, alpha) > conditional_upper_bound(f, y0, alpha)
    assert conditional_upper_bound(f, y0, alpha / 2) > conditional_upper_bound(f, y0, alpha)
    # linear in y0
    m0, m1, m2 = (conditional_mean(f, y0 + k * step) for k in range(3))
    assert m2 - m1 == pytest.approx(m1 - m0, abs=1e-9)


def test_empirical_conditional_examples():
    e = EmpiricalCdf([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert empirical_conditional(e, 1.0, 2.0) == 0.5
    assert empirical_conditional(e, 3.0, 3.0) == 1.0
    with pytest.raises(ValueError, match="no mass below Y_0"):
        empirical_conditional(e, 1.0, 0.5)


@given(st.integers(0, 10**6))
def test_empirical_conditional_double_loop(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 20, size=1000).astype(float)
    y = rng.integers(0, 20, size=1000).astype(float)
    e = EmpiricalCdf(x, y)
    z, y0 = float(rng.integers(0, 20)), float(rng.integers(0, 20))
    below = [i for i in range(1000) if y[i] <= y0]
    both = [i for i in below if x[i] <= z]
    assert empirical_conditional(e, z, y0) == len(both) / len(below)
    assert e.joint(z, y0) == len(both) / 1000
    assert e.marginal_y(y0) == len(below) / 1000


def test_mcrp_score_values():
    assert McrpScore(0.9, 0.5, 0.1).score == pytest.approx(0.9 - 0.1 * math.log(0.5))
    assert McrpScore(0.9, 0.5, 0.1).score == pytest.approx(0.9693, abs=1e-4)
    assert McrpScore(0.7, 1.0, 5.0).score == 0.7
    rng = np.random.default_rng(0)
    x = rng.normal(size=100)
    series = SampleSeries(x + rng.normal(size=100), x, x)
    s = mcrp_score(series, 0.3)
    assert s.score == s.corr == pytest.approx(fit_bivariate(series).rho)
    with pytest.raises(ValueError):
        mcrp_score(series, 0.0)


def small_instance():
    return generate_instance(GeneratorConfig(20, 5, seed=3))


def test_sampling_deterministic_small():
    inst = small_instance()
    a = sample_objectives(inst, SamplingConfig(n=3, master_seed=9))
    b = sample_objectives(inst, SamplingConfig(n=3, master_seed=9))
    assert len(a) == 3
    for col in ("y_pi", "x_return", "x_sshape"):
        assert np.array_equal(a.column(col), b.column(col))


def test_sampling_schedule_independent():
    inst = small_instance()
    a = sample_objectives(inst, SamplingConfig(n=200, master_seed=1, workers=1, chunk=64))
    b = sample_objectives(inst, SamplingConfig(n=200, master_seed=1, workers=4, chunk=7))
    for col in ("y_pi", "x_return", "x_sshape"):
        assert np.array_equal(a.column(col), b.column(col))


def test_sampling_identical_profiles():
    inst = make_instance((5, 5), {1: (1, 2)}, {o: [1] for o in range(1, 7)}, capacity=2)
    s = sample_objectives(inst, SamplingConfig(n=20))
    for col in ("y_pi", "x_return", "x_sshape"):
        assert len(set(s.column(col))) == 1


def test_sampling_frequencies_tiny(tiny):
    s = sample_objectives(tiny, SamplingConfig(n=6000, master_seed=2))
    blocks = ([[1, 2], [3, 4]], [[1, 3], [2, 4]], [[1, 4], [2, 3]])
    values = [objective(tiny, Partition.from_batches(b), "return").combined for b in blocks]
    counts = collections.Counter(np.round(s.x_return, 9))
    for v in set(values):
        share = counts[round(v, 9)] / 6000
        assert share == pytest.approx(values.count(v) / 3, abs=0.03)


def test_series_csv_roundtrip(tmp_path):
    s = sample_objectives(small_instance(), SamplingConfig(n=25))
    path = tmp_path / "s.csv"
    write_series_csv(s, path)
    assert path.read_text().splitlines()[0] == "row,y_pi,x_return,x_sshape"
    back = read_series_csv(path)
    for col in ("y_pi", "x_return", "x_sshape"):
        assert np.array_equal(back.column(col), s.column(col))
