import numpy as np
import pytest

from weightedexp import (
    BootstrapConfig,
    BootstrapDegenerate,
    EstimationFailed,
    FamilySpec,
    Params,
    SeededStream,
    bootstrap_bias_reduce,
    from_named,
    point_estimate,
    sample,
)
from weightedexp.bootstrap import min_successes

SPEC = FamilySpec(1, 1)


def _data(n=20, seed=0):
    return sample(SPEC, Params(3.0, 1 / 3), n, SeededStream(seed))


def test_config_validation():
    with pytest.raises(ValueError):
        BootstrapConfig(B=0)
    with pytest.raises(ValueError):
        BootstrapConfig(B=2.5)
    with pytest.raises(ValueError):
        BootstrapConfig(scheme="jackknife")
    assert BootstrapConfig(stream=4).stream == SeededStream(4)


def test_min_successes():
    assert [min_successes(b) for b in (1, 5, 10, 20, 40, 41, 200)] == [1, 5, 10, 10, 10, 11, 50]


def test_identity_resample_leaves_estimates_unchanged():
    x = _data()
    out = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(1, stream=0),
                                resampler=lambda rng, n, B: np.arange(n)[None, :])
    np.testing.assert_allclose(out.reduced, out.raw, rtol=1e-14)
    assert out.replicates_used == 1 and out.failures == 0
    assert out.names == ("mu", "sigma")


def test_correction_identity_against_manual_replicates():
    x = _data()
    rows = np.random.default_rng(3).integers(0, x.size, size=(30, x.size))
    out = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(30, stream=0), resampler=lambda rng, n, B: rows)
    manual = np.array([point_estimate(x[r], SPEC) for r in rows])
    np.testing.assert_allclose(out.replicate_mean, manual.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(out.reduced, 2 * np.array(point_estimate(x, SPEC)) - manual.mean(axis=0), rtol=1e-12)


def test_same_stream_is_reproducible():
    x = _data()
    a = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(50, stream=SeededStream(9)))
    b = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(50, stream=SeededStream(9)))
    c = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(50, stream=SeededStream(10)))
    np.testing.assert_array_equal(a.reduced, b.reduced)
    assert not np.array_equal(a.reduced, c.reduced)


def _with_failing_rows(n_fail, B=20):
    # x[0] == 1 gives T == 1 exactly; a resample of only that value cannot be fitted
    x = np.concatenate([[1.0], _data(19, seed=5)])
    rows = np.random.default_rng(1).integers(0, x.size, size=(B, x.size))
    rows[:n_fail] = 0
    return x, rows


def test_failed_replicates_are_counted_and_skipped():
    x, rows = _with_failing_rows(5)
    out = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(20, stream=0), resampler=lambda rng, n, B: rows)
    assert out.failures == 5 and out.replicates_used == 15
    manual = np.array([point_estimate(x[r], SPEC) for r in rows[5:]])
    np.testing.assert_allclose(out.replicate_mean, manual.mean(axis=0), rtol=1e-12)


def test_too_many_failures_is_degenerate():
    x, rows = _with_failing_rows(11)
    with pytest.raises(BootstrapDegenerate) as info:
        bootstrap_bias_reduce(x, SPEC, BootstrapConfig(20, stream=0), resampler=lambda rng, n, B: rows)
    assert info.value.quantity == 9


def test_unfittable_original_sample():
    with pytest.raises(EstimationFailed):
        bootstrap_bias_reduce(np.ones(10), SPEC, BootstrapConfig(20, stream=0))


def test_native_parameter_correction():
    x = _data()
    out = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(40, stream=1), named="weighted_inverse_lindley")
    assert out.names == ("lambda", "phi")
    mu, sigma = point_estimate(x, SPEC)
    np.testing.assert_allclose(out.raw, [mu * sigma, mu], rtol=1e-14)
    assert set(out.as_dict()) == {"lambda", "phi"}


def test_parametric_scheme_runs_and_differs():
    x = _data()
    par = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(50, "parametric", stream=2))
    non = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(50, "nonparametric", stream=2))
    np.testing.assert_array_equal(par.raw, non.raw)
    assert not np.array_equal(par.reduced, non.reduced)
    assert par.replicates_used + par.failures == 50


def test_classical_member_correction():
    m = from_named("gamma", {"alpha": 2.0, "beta": 1.0})
    x = sample(m.spec, m.params, 30, SeededStream(6))
    out = bootstrap_bias_reduce(x, m.spec, BootstrapConfig(40, stream=0), named=m)
    assert out.names == ("alpha", "beta")
    assert out.replicates_used == 40


def test_negative_reduced_estimate_warns():
    x = _data()
    # a resample of the two smallest values has mu far above twice the raw mu
    two = np.tile(np.argsort(x)[:2], x.size // 2)
    rows = np.vstack([two] * 5)
    with pytest.warns(RuntimeWarning, match="non-positive"):
        out = bootstrap_bias_reduce(x, SPEC, BootstrapConfig(5, stream=0), resampler=lambda rng, n, B: rows)
    assert out.has_negative and out.reduced[0] < 0


@pytest.mark.filterwarnings("ignore:bias correction produced")
def test_bias_reduction_on_small_samples():
    # n = 20: the corrected phi is on average closer to the truth than the raw one
    truth = 3.0
    m = from_named("weighted_inverse_lindley", {"lambda": 1.0, "phi": truth})
    raw, red = [], []
    for r in range(500):
        x = sample(m.spec, m.params, 20, SeededStream(77, r))
        try:
            out = bootstrap_bias_reduce(x, m.spec, BootstrapConfig(200, stream=SeededStream(77, (r, 1))), named=m)
        except EstimationFailed:
            continue
        raw.append(out.raw[1])
        red.append(out.reduced[1])
    assert len(raw) == 500
    assert abs(np.mean(red) - truth) < abs(np.mean(raw) - truth)
