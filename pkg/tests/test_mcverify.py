"""Monte Carlo estimation, rate fitting, and certificate verification.

Structural properties (determinism, shared-sample counting, CSV shape)
are exact; distributional ones use the reflection-series law of the
Brownian sup as an independent oracle.
"""

import math

import numpy as np
import pytest
from scipy.stats import norm as normal

from smallball.bounds import Certificate, Regime
from smallball.errors import InvalidComparisonError
from smallball.mcverify import (
    NormSpec,
    bm_sup_exact,
    estimate_small_ball,
    estimate_small_ball_drifts,
    drift_norm_samples,
    fit_rate,
    partition_norm_samples,
    verify_certificates,
)
from smallball.paths import UniformGrid, holder_norm_batch
from smallball.simulate import DriftSpec, ProcessSpec, SeedSpec, path_values_block

BM = ProcessSpec(kind="bm")
GRID = UniformGrid(1.0, 256)


def _cert(epsilon, total, *, delta=0.25, N=4, vacuous=False):
    flags = ("VACUOUS",) if vacuous else ()
    return Certificate.build(
        epsilon=epsilon, T=1.0, regime=Regime.sup(), p=2, N=N, delta=delta,
        I=1.0, term_concentration=total, term_drift=0.0, mode="EXPLICIT",
        flags=flags,
    )


def _bm_sup_reflection(eps):
    # P(sup_{[0,1]} |B| <= eps) = sum_k (-1)^k [Phi((2k+1) eps) - Phi((2k-1) eps)]
    total = 0.0
    for k in range(-40, 41):
        total += (-1) ** k * (
            normal.cdf((2 * k + 1) * eps) - normal.cdf((2 * k - 1) * eps)
        )
    return total


class TestNormSpec:
    def test_labels_and_regimes(self):
        assert NormSpec("sup").label() == "sup"
        assert NormSpec("l1").regime().kind == "l1"
        h = NormSpec("holder", beta=0.25)
        assert h.label() == "holder(0.25)"
        assert h.regime().beta == 0.25

    def test_validation(self):
        with pytest.raises(ValueError):
            NormSpec("l2")
        with pytest.raises(ValueError):
            NormSpec("holder")
        with pytest.raises(ValueError):
            NormSpec("sup", beta=0.3)


class TestEstimate:
    def test_needs_enough_paths_and_positive_epsilons(self):
        with pytest.raises(ValueError):
            estimate_small_ball(BM, GRID, [0.5], 100, seed=1)
        with pytest.raises(ValueError):
            estimate_small_ball(BM, GRID, [-0.5], 2000, seed=1)

    def test_shared_sample_counts_are_monotone(self):
        table = estimate_small_ball(BM, GRID, [0.3, 0.6, 1.0, 2.0], 2000, seed=1)
        ks = [r.k for r in table.rows]
        assert ks == sorted(ks)
        assert all(r.cp_lower <= r.p_hat <= r.cp_upper for r in table.rows)

    def test_matches_brute_force_counting(self):
        eps = [0.5, 1.0]
        table = estimate_small_ball(BM, GRID, eps, 1000, seed=3)
        vals = path_values_block(BM, GRID, SeedSpec(3), np.arange(1000))
        sups = np.max(np.abs(vals), axis=1)
        for e, row in zip(eps, table.rows):
            assert row.k == int(np.count_nonzero(sups <= e))

    def test_worker_count_does_not_change_output(self):
        t1 = estimate_small_ball(BM, GRID, [0.5, 1.0], 2000, seed=5, workers=1)
        t2 = estimate_small_ball(BM, GRID, [0.5, 1.0], 2000, seed=5, workers=2)
        assert t1.to_csv_text() == t2.to_csv_text()

    def test_agrees_with_reflection_series(self):
        # the discrete sup underestimates the true sup, so the estimated
        # ball probability sits above the continuous one and converges
        # from above as the grid refines
        exact = _bm_sup_reflection(1.0)
        coarse = estimate_small_ball(BM, GRID, [1.0], 20000, seed=11).rows[0]
        fine = estimate_small_ball(
            BM, UniformGrid(1.0, 2048), [1.0], 20000, seed=11
        ).rows[0]
        assert coarse.cp_lower > exact
        assert fine.cp_upper > exact
        assert abs(fine.p_hat - exact) < abs(coarse.p_hat - exact)
        assert fine.p_hat - exact < 0.02

    def test_csv_layout(self):
        table = estimate_small_ball(BM, GRID, [0.5], 1000, seed=1)
        lines = table.to_csv_text().strip().split("\n")
        assert lines[0] == "# small-ball estimates v1"
        assert any(line.startswith("# digest=") for line in lines)
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "epsilon,n_paths,k,p_hat,cp_lower,cp_upper,confidence"

    def test_holder_norm_counts_match_batch_norms(self):
        grid = UniformGrid(1.0, 64)
        spec = ProcessSpec(kind="fbm", H=0.4)
        eps = [0.4, 0.8, 1.6]
        table = estimate_small_ball(
            spec, grid, eps, 1000, seed=9, norm=NormSpec("holder", beta=0.2)
        )
        vals = path_values_block(spec, grid, SeedSpec(9), np.arange(1000))
        norms = holder_norm_batch(vals, grid.delta, 0.2)
        for e, row in zip(eps, table.rows):
            assert row.k == int(np.count_nonzero(norms <= e))

    def test_l1_norm_counts(self):
        eps = [0.2, 0.5]
        table = estimate_small_ball(BM, GRID, eps, 1000, seed=9, norm=NormSpec("l1"))
        vals = path_values_block(BM, GRID, SeedSpec(9), np.arange(1000))
        l1 = GRID.delta * np.sum(np.abs(vals[:, :-1]), axis=1)
        for e, row in zip(eps, table.rows):
            assert row.k == int(np.count_nonzero(l1 <= e))

    def test_interval_width_halves_with_quadrupled_sample(self):
        # CP width scales like 1/sqrt(n) at fixed p
        t1 = estimate_small_ball(BM, GRID, [1.0], 4000, seed=2)
        t2 = estimate_small_ball(BM, GRID, [1.0], 16000, seed=2)
        w1 = t1.rows[0].cp_upper - t1.rows[0].cp_lower
        w2 = t2.rows[0].cp_upper - t2.rows[0].cp_lower
        assert 0.5 * 0.8 <= w1 / (2 * w2) <= 0.5 * 1.2 * 2


class TestMultiDriftEstimate:
    def test_byte_identical_to_single_runs(self):
        drifts = [
            DriftSpec(),
            DriftSpec(kind="bounded_wave", amplitude=1.0),
            DriftSpec(kind="shared_fbm"),
        ]
        spec = ProcessSpec(kind="fbm", H=0.3)
        grid = UniformGrid(1.0, 128)
        eps = [0.3, 0.6]
        tables = estimate_small_ball_drifts(spec, drifts, grid, eps, 2000, seed=17)
        for d, t in zip(drifts, tables):
            single = estimate_small_ball(
                ProcessSpec(kind="fbm", H=0.3, drift=d), grid, eps, 2000, seed=17
            )
            assert t.to_csv_text() == single.to_csv_text()

    def test_worker_determinism(self):
        drifts = [DriftSpec(), DriftSpec(kind="shared_fbm")]
        spec = ProcessSpec(kind="fbm", H=0.3)
        grid = UniformGrid(1.0, 128)
        a = estimate_small_ball_drifts(spec, drifts, grid, [0.5], 2000, seed=17, workers=1)
        b = estimate_small_ball_drifts(spec, drifts, grid, [0.5], 2000, seed=17, workers=2)
        assert [t.to_csv_text() for t in a] == [t.to_csv_text() for t in b]

    def test_requires_at_least_one_drift(self):
        with pytest.raises(ValueError):
            estimate_small_ball_drifts(BM, [], GRID, [0.5], 2000, seed=1)


class TestNormSamples:
    def test_partition_norms_match_path_blocks(self):
        spec = ProcessSpec(kind="fbm", H=0.3, drift=DriftSpec(kind="shared_fbm"))
        grid = UniformGrid(1.0, 32)
        samples = partition_norm_samples(spec, grid, 2.0, 600, seed=21)
        # drift must be stripped: compare against the bare process
        vals = path_values_block(ProcessSpec(kind="fbm", H=0.3), grid, SeedSpec(21), np.arange(600))
        inc = np.diff(vals, axis=1)
        np.testing.assert_allclose(samples, np.sqrt((inc**2).sum(axis=1)), atol=1e-12)

    def test_second_moment_scale(self):
        # E |X|_2^2 = N delta^{2H}
        grid = UniformGrid(1.0, 64)
        s = partition_norm_samples(ProcessSpec(kind="fbm", H=0.3), grid, 2.0, 4000, seed=2)
        target = 64 * grid.delta**0.6
        assert abs((s**2).mean() - target) / target < 0.05

    def test_deterministic_drift_norms(self):
        spec = ProcessSpec(kind="bm", drift=DriftSpec(kind="constant", level=-1.5))
        s = drift_norm_samples(spec, GRID, NormSpec("sup"), 300, seed=4)
        np.testing.assert_array_equal(s, np.full(300, 1.5))
        wave = ProcessSpec(kind="bm", drift=DriftSpec(kind="bounded_wave", amplitude=2.0))
        s = drift_norm_samples(wave, GRID, NormSpec("sup"), 300, seed=4)
        grid_max = 2.0 * np.max(np.abs(np.sin(2 * np.pi * GRID.times)))
        np.testing.assert_allclose(s, grid_max, atol=1e-12)

    def test_l1_event_controls_l1_of_drift(self):
        # left Riemann sum of a constant is exact: integral of |2| over [0,1]
        spec = ProcessSpec(kind="bm", drift=DriftSpec(kind="constant", level=2.0))
        s = drift_norm_samples(spec, GRID, NormSpec("l1"), 300, seed=4)
        np.testing.assert_allclose(s, 2.0, atol=1e-12)


class TestBmSupExact:
    def test_matches_reflection_series(self):
        for eps in (0.4, 0.5, 1.0, 1.7):
            assert bm_sup_exact(eps) == pytest.approx(
                _bm_sup_reflection(eps), abs=1e-10
            )

    def test_frozen_digits(self):
        assert bm_sup_exact(1.0) == pytest.approx(0.3707774297995239, rel=1e-12)
        assert bm_sup_exact(0.5) == pytest.approx(0.009156990289760759, rel=1e-12)

    def test_horizon_scaling(self):
        # sup over [0, T] scales like sqrt(T)
        assert bm_sup_exact(0.5, T=0.25) == pytest.approx(bm_sup_exact(1.0), rel=1e-12)

    def test_edge(self):
        assert bm_sup_exact(0.0) == 0.0


class TestFitRate:
    def test_exact_recovery(self):
        eps = np.geomspace(0.3, 0.9, 12)
        vals = np.exp(-2.0 * eps**-3.0)
        fit = fit_rate(eps, vals, mode="RAW")
        assert fit.gamma_hat == pytest.approx(3.0, abs=1e-12)
        assert fit.c2_hat == pytest.approx(2.0, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.n_used == 12

    def test_prefactor_aware_is_exact_with_prefactor(self):
        eps = np.geomspace(0.2, 0.8, 10)
        vals = 0.5 * np.exp(-0.3 * eps**-2.0)
        fit = fit_rate(eps, vals, mode="PREFACTOR_AWARE", c1=0.5)
        assert fit.gamma_hat == pytest.approx(2.0, abs=1e-12)
        assert fit.c2_hat == pytest.approx(0.3, rel=1e-12)
        # RAW on the same curve is biased by the ignored prefactor
        raw = fit_rate(eps, vals, mode="RAW")
        assert abs(raw.gamma_hat - 2.0) > 1e-3

    def test_strict_mode_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            fit_rate([0.1, 0.2, 0.3], [0.5, 1.0, 0.2])
        with pytest.raises(ValueError):
            fit_rate([0.1, 0.2, 0.3], [0.5, 0.0, 0.2])

    def test_window_drops_points(self):
        eps = np.geomspace(0.3, 0.9, 12)
        vals = np.exp(-2.0 * eps**-3.0)
        vals[0] = 0.0  # saturated empirical cell
        vals[-1] = 1.0
        fit = fit_rate(eps, vals, value_window=(0.0, 1.0))
        assert fit.n_used == 10
        assert fit.gamma_hat == pytest.approx(3.0, abs=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            fit_rate([0.1, 0.2], [0.5, 0.4])
        with pytest.raises(ValueError):
            fit_rate([0.1, 0.2, 0.3], [0.5, 0.4, 0.3], mode="LOGLOG")


class TestVerify:
    def _table(self, epsilons, n_paths=2000, seed=1):
        return estimate_small_ball(BM, GRID, epsilons, n_paths, seed=seed)

    def test_verdicts(self):
        table = self._table([0.5, 1.0, 2.0])
        upper_mid = table.rows[1].cp_upper
        certs = [
            _cert(0.5, 1.0, vacuous=True),
            _cert(1.0, min(1.0 - 1e-9, upper_mid + 0.05)),
            _cert(2.0, 0.01),  # far below the empirical upper limit
        ]
        report = verify_certificates(table, certs)
        assert [r.verdict for r in report.rows] == ["VACUOUS", "PASS", "FAIL"]
        assert not report.ok
        assert report.counts() == {"PASS": 1, "FAIL": 1, "VACUOUS": 1}
        assert report.rows[1].margin > 0 >= report.rows[2].margin

    def test_csv_schema(self):
        table = self._table([0.5])
        report = verify_certificates(table, [_cert(0.5, 0.9)])
        text = report.to_csv_text()
        assert text.startswith("epsilon,p_hat,ci_lo,ci_hi,bound,verdict\n")
        assert len(text.strip().split("\n")) == 2

    def test_certificates_accepted_in_any_order(self):
        table = self._table([0.5, 1.0])
        certs = [_cert(1.0, 0.99), _cert(0.5, 0.9)]
        report = verify_certificates(table, certs)
        assert [r.epsilon for r in report.rows] == [0.5, 1.0]

    def test_count_mismatch_raises(self):
        with pytest.raises(InvalidComparisonError):
            verify_certificates(self._table([0.5, 1.0]), [_cert(0.5, 0.9)])

    def test_epsilon_mismatch_raises(self):
        with pytest.raises(InvalidComparisonError):
            verify_certificates(self._table([0.5]), [_cert(0.51, 0.9)])

    def test_nesting_violation_raises(self):
        # grid step is 1/256; a partition step of 0.3/256ths does not nest
        bad = _cert(0.5, 0.9, delta=0.3 / 256, N=850)
        with pytest.raises(InvalidComparisonError):
            verify_certificates(self._table([0.5]), [bad])
        # the same certificate passes when nesting checks are disabled
        report = verify_certificates(self._table([0.5]), [bad], check_nesting=False)
        assert report.rows[0].verdict in ("PASS", "FAIL")

    def test_witnessless_vacuous_certificate_skips_nesting(self):
        c = Certificate.vacuous_certificate(0.5, 1.0, Regime.sup(), reason="infeasible")
        report = verify_certificates(self._table([0.5]), [c])
        assert report.rows[0].verdict == "VACUOUS"

    def test_non_monotone_estimates_rejected(self):
        table = self._table([0.5, 1.0])
        broken = table.__class__(
            process=table.process, norm=table.norm, T=table.T, N=table.N,
            seed=table.seed, n_paths=table.n_paths, confidence=table.confidence,
            digest=table.digest,
            rows=(table.rows[1], table.rows[0]),  # p_hat now decreasing
        )
        with pytest.raises(InvalidComparisonError):
            verify_certificates(broken, [_cert(0.5, 0.9), _cert(1.0, 0.9)])
