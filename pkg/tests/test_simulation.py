import csv
import math

import numpy as np
import pytest

from weightedexp import FamilySpec, SeededStream, from_named, point_estimate, sample, to_named
from weightedexp.simulation import (
    Scenario,
    aggregate,
    default_threads,
    read_config,
    run_monte_carlo,
    simulate_estimates,
    write_estimates,
    write_metrics,
)


def _write(tmp_path, text):
    p = tmp_path / "scenario.cfg"
    p.write_text(text, encoding="utf-8")
    return p


def test_read_config(tmp_path):
    cfg = _write(tmp_path, """
# comment line
model = weighted_inverse_lindley
lambda = 1
phi = 0.5, 3   # trailing comment
sample_sizes = 20, 50
replications = 7
bootstrap = 11
estimators = mom, mle
scheme = parametric
seed = 99
""")
    sc = read_config(cfg)
    assert sc.model == "weighted_inverse_lindley"
    assert sc.grid == {"lambda": [1.0], "phi": [0.5, 3.0]}
    assert sc.n_grid == [20, 50]
    assert (sc.N, sc.B, sc.master_seed, sc.scheme) == (7, 11, 99, "parametric")
    assert sc.estimators == ("mom", "mle")
    cells = sc.cells()
    assert [(c.native["phi"], c.n) for c in cells] == [(0.5, 20), (0.5, 50), (3.0, 20), (3.0, 50)]
    assert [c.index for c in cells] == [0, 1, 2, 3]


@pytest.mark.parametrize("text", [
    "model = gamma\nalpha = 1\nbeta = 1\n",                      # no sample sizes
    "model = gamma\nalpha = 1\nsample_sizes = 10\n",             # missing beta
    "model = gamma\nalpha = 1\nbeta = 1\nsample_sizes = x\n",    # bad integer
    "model = gamma\nalpha = 1\nbeta = 1\nsample_sizes = 10\nestimators = ols\n",
    "model = nope\nsample_sizes = 10\n",
    "model = gamma\nalpha 1\n",
])
def test_read_config_errors(tmp_path, text):
    with pytest.raises(ValueError):
        read_config(_write(tmp_path, text))


def test_single_replication_hand_recomputation():
    sc = Scenario("weighted_inverse_lindley", {"lambda": [1.0], "phi": [3.0]}, [20], N=1, B=20,
                  master_seed=5, estimators=("mom",))
    rows = run_monte_carlo(sc, threads=1)
    m = from_named("weighted_inverse_lindley", {"lambda": 1.0, "phi": 3.0})
    x = sample(m.spec, m.params, 20, SeededStream(5, (0, 0)).spawn(0))
    native = to_named("weighted_inverse_lindley", m.spec, point_estimate(x, m.spec), strict=False)
    by_param = {r.parameter_name: r for r in rows}
    for k, truth in (("lambda", 1.0), ("phi", 3.0)):
        r = by_param[k]
        assert r.RB == abs(native[k] - truth) / truth
        assert r.RMSE == pytest.approx(abs(native[k] - truth), rel=1e-15)
        assert (r.N, r.N_effective, r.flagged) == (1, 1, False)


def test_thread_count_does_not_change_records():
    sc = Scenario("weighted_inverse_lindley", {"lambda": [1.0], "phi": [0.5, 3.0]}, [20, 40], N=6, B=15,
                  master_seed=1)
    assert simulate_estimates(sc, threads=1) == simulate_estimates(sc, threads=3)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_reaggregation_from_estimate_dump(tmp_path):
    # one pass over estimates.csv, independent of the package's aggregation code
    sc = Scenario("gamma", {"alpha": [2.0], "beta": [0.5, 2.0]}, [10, 30], N=25, B=20, master_seed=3,
                  estimators=("mom", "mom_boot", "mle"))
    recs = simulate_estimates(sc, threads=1)
    write_estimates(tmp_path / "estimates.csv", sc, recs)
    write_metrics(tmp_path / "metrics.csv", sc, aggregate(sc, recs))
    sums = {}
    for row in _read_csv(tmp_path / "estimates.csv"):
        key = (row["cell"], row["estimator"], row["parameter"])
        acc = sums.setdefault(key, [0, 0.0, 0.0])
        if row["status"] == "ok":
            v = float(row["estimate"])
            truth = float(row[row["parameter"]])
            acc[0] += 1
            acc[1] += v
            acc[2] += (v - truth) ** 2
    metrics = _read_csv(tmp_path / "metrics.csv")
    assert len(metrics) == 4 * 3 * 2
    for row in metrics:
        cnt, total, sq = sums[(row["cell"], row["estimator"], row["parameter"])]
        truth = float(row["true_value"])
        assert int(row["N_effective"]) == cnt <= int(row["N"])
        assert float(row["RB"]) == pytest.approx(abs(total / cnt - truth) / abs(truth), rel=1e-12, abs=1e-15)
        assert float(row["RMSE"]) == pytest.approx(math.sqrt(sq / cnt), rel=1e-12)


def test_failures_are_counted_and_flagged(tmp_path, monkeypatch):
    import weightedexp.simulation as simmod
    from weightedexp import EstimationFailed

    real = simmod.point_estimate

    def flaky(x, spec):
        # fail on roughly half of the datasets, decided by the data alone
        if x[0] > x[1]:
            raise EstimationFailed("injected", "test")
        return real(x, spec)

    monkeypatch.setattr(simmod, "point_estimate", flaky)
    sc = Scenario("weighted_inverse_lindley", {"lambda": [1.0], "phi": [3.0]}, [10], N=40, B=10, master_seed=0,
                  estimators=("mom", "mle"))
    recs = simulate_estimates(sc, threads=1)
    rows = aggregate(sc, recs)
    failed = sum(not r.ok for r in recs if r.estimator == "mom") // 2
    assert 0 < failed < sc.N
    for r in rows:
        expected = sc.N - failed if r.estimator_name == "mom" else sc.N
        assert r.N_effective == expected <= r.N
        assert r.flagged == (r.N_effective < 0.75 * sc.N)
    assert any(r.flagged for r in rows)
    write_estimates(tmp_path / "e.csv", sc, recs)
    dump = _read_csv(tmp_path / "e.csv")
    assert {row["status"] for row in dump} == {"ok", "failed"}
    assert all(row["estimate"] == "" for row in dump if row["status"] == "failed")
    write_metrics(tmp_path / "m.csv", sc, rows)
    assert {row["flagged"] for row in _read_csv(tmp_path / "m.csv")} == {"0", "1"}


def test_csv_values_round_trip_exactly(tmp_path):
    sc = Scenario("gamma", {"alpha": [2.0], "beta": [0.5]}, [15], N=5, B=10, master_seed=8, estimators=("mom",))
    recs = simulate_estimates(sc, threads=1)
    write_estimates(tmp_path / "e.csv", sc, recs)
    dumped = [float(r["estimate"]) for r in _read_csv(tmp_path / "e.csv")]
    assert dumped == [r.value for r in recs]
    raw = (tmp_path / "e.csv").read_bytes()
    assert raw.count(b"\r\n") == len(recs) + 1


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("WEIGHTEDEXP_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("WEIGHTEDEXP_THREADS")
    assert default_threads() >= 1


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario("gamma", {"alpha": [2.0]}, [10])
    with pytest.raises(ValueError):
        Scenario("gamma", {"alpha": [2.0], "beta": [-1.0]}, [10])
    with pytest.raises(ValueError):
        Scenario("gamma", {"alpha": [2.0], "beta": [1.0]}, [1])
    with pytest.raises(ValueError):
        Scenario("gamma", {"alpha": [2.0], "beta": [1.0]}, [10], scheme="jackknife")


def test_rmse_shrinks_with_sample_size():
    sc = Scenario("gamma", {"alpha": [2.0], "beta": [1.0]}, [20, 400], N=100, B=20, master_seed=2,
                  estimators=("mom", "mle"))
    rows = run_monte_carlo(sc, threads=1)
    small = {(r.estimator_name, r.parameter_name): r.RMSE for r in rows if r.n == 20}
    large = {(r.estimator_name, r.parameter_name): r.RMSE for r in rows if r.n == 400}
    assert all(large[k] < small[k] for k in small)
    assert np.isfinite(list(small.values())).all()
    assert FamilySpec(-1, 0) == from_named("gamma", {"alpha": 2.0, "beta": 1.0}).spec
