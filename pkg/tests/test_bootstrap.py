import numpy as np
import pytest

from sobolkit.bootstrap import BootstrapConfig, bootstrap_ci
from sobolkit.errors import ConfigurationError, DegenerateModelError
from sobolkit.estimators import oracle2_value
from sobolkit.rng import substream


def oracle2_closure(arrays):
    return oracle2_value(arrays[0], arrays[1])


@pytest.fixture
def pair():
    rng = substream(1, "bootstrap-pair")
    x = rng.normal(size=200)
    wmi = 0.6 * x + 0.8 * rng.normal(size=200)
    return x, wmi


class TestBootstrapCi:
    def test_identity_resample_collapses_interval(self, pair):
        cfg = BootstrapConfig(replicates=1, seed=0)
        point = oracle2_closure(list(pair))
        lo, hi = bootstrap_ci(oracle2_closure, pair, cfg,
                              index_source=lambda b: np.arange(200))
        assert lo == hi == point

    def test_constant_estimator(self, pair):
        cfg = BootstrapConfig(replicates=50, seed=0)
        lo, hi = bootstrap_ci(lambda arrays: 0.321, pair, cfg)
        assert (lo, hi) == (0.321, 0.321)

    def test_deterministic(self, pair):
        cfg = BootstrapConfig(replicates=200, seed=42, labels=("t",))
        assert bootstrap_ci(oracle2_closure, pair, cfg) == \
            bootstrap_ci(oracle2_closure, pair, cfg)

    def test_monotone_nesting(self, pair):
        wide = BootstrapConfig(replicates=400, level=0.99, seed=7)
        narrow = BootstrapConfig(replicates=400, level=0.95, seed=7)
        lo99, hi99 = bootstrap_ci(oracle2_closure, pair, wide)
        lo95, hi95 = bootstrap_ci(oracle2_closure, pair, narrow)
        assert lo99 <= lo95 and hi95 <= hi99

    def test_joint_resampling_preserves_pairing(self, pair):
        # instrumented estimator: the resampled rows must stay aligned
        x, wmi = pair
        coupled = wmi.copy()  # row k of both arrays share the tag x[k]
        seen = []

        def instrumented(arrays):
            a, b = arrays
            seen.append(np.array_equal(a, b))
            return 0.0

        bootstrap_ci(instrumented, [x, x], BootstrapConfig(replicates=25, seed=3))
        assert all(seen)

    def test_degenerate_resamples_are_retried(self):
        # estimator fails unless the resample contains at least two distinct
        # values; with two distinct inputs most resamples succeed
        calls = {"n": 0}

        def picky(arrays):
            calls["n"] += 1
            if len(set(arrays[0].tolist())) < 2:
                raise DegenerateModelError("flat")
            return float(arrays[0].mean())

        lo, hi = bootstrap_ci(picky, [np.array([0.0, 1.0])],
                              BootstrapConfig(replicates=300, seed=5))
        assert lo >= 0.0 and hi <= 1.0 and calls["n"] >= 300

    def test_hard_error_after_retries(self):
        def always_fails(arrays):
            raise DegenerateModelError("flat")

        with pytest.raises(DegenerateModelError):
            bootstrap_ci(always_fails, [np.array([0.0, 1.0])],
                         BootstrapConfig(replicates=3, seed=5))

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            BootstrapConfig(replicates=0)
        with pytest.raises(ConfigurationError):
            BootstrapConfig(level=1.0)
        with pytest.raises(ConfigurationError):
            BootstrapConfig(method="bca")


class TestCoverageSmoke:
    def test_interval_covers_truth_mostly(self):
        # small-scale coverage check (the full study is in the acceptance
        # suite): oracle2 on a linear pair with known correlation
        rng = substream(11, "cov")
        hits = 0
        n_outer = 60
        rho = 0.6
        for rep in range(n_outer):
            x = rng.normal(size=150)
            wmi = rho * x + np.sqrt(1 - rho ** 2) * rng.normal(size=150)
            cfg = BootstrapConfig(replicates=300, seed=rep, labels=("smoke",))
            lo, hi = bootstrap_ci(oracle2_closure, [x, wmi], cfg)
            hits += lo <= rho <= hi
        assert hits / n_outer >= 0.8
