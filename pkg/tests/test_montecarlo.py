"""Monte-Carlo harness: matching, determinism, moments, sweeps."""

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nftkit.collocation import FCPolicy, WindowSpec, fc_modes
from nftkit.darboux import DiscreteSpectrum, darboux
from nftkit.montecarlo import (MCConfig, MCResult, OUTLIER_FLAG,
                               compare_to_analytic, error_sweep, greedy_match,
                               relative_error, run_mc, write_sweep_csv)
from nftkit.perturbation import CovarianceReport, build_kit, covariance_report
from nftkit.presets import get_preset, two_soliton_spectrum
from nftkit.signal import (NFTError, NoiseModel, Pulse, TimeGrid,
                           colored_covariance)


@pytest.fixture(scope="module")
def coarse():
    grid = TimeGrid(T=35.34, M=65)
    pulse, _ = darboux(two_soliton_spectrum(0.0), grid)
    windows = WindowSpec.hann(grid)
    _, modes = fc_modes(pulse, FCPolicy(count=2), windows)
    reference = DiscreteSpectrum(np.array([m.lam for m in modes]),
                                 np.array([m.b for m in modes]))
    return pulse, reference


class TestGreedyMatch:
    def test_identity(self):
        ref = np.array([1j, 2j, 0.5 + 1j])
        assert greedy_match(ref, ref.copy()).tolist() == [0, 1, 2]

    def test_single_claim_prefers_closer_reference(self):
        ref = np.array([1.0j, 1.2j])
        cands = np.array([1.19j])
        assert greedy_match(ref, cands).tolist() == [-1, 0]

    def test_surplus_candidates_ignored(self):
        ref = np.array([1.0j])
        cands = np.array([5.0j, 1.01j, -3.0j])
        assert greedy_match(ref, cands).tolist() == [1]

    def test_no_candidates(self):
        assert greedy_match(np.array([1.0j, 2.0j]), np.array([])).tolist() == [-1, -1]

    @settings(deadline=None, max_examples=30)
    @given(perm=st.permutations(list(range(5))))
    def test_permutation_recovery(self, perm):
        ref = np.array([0.3j, 0.9j, 1.5j, 1.0 + 0.6j, -1.0 + 1.2j])
        perm = np.array(perm)
        idx = greedy_match(ref, ref[perm])
        assert np.array_equal(perm[idx], np.arange(5))


class TestConfig:
    def test_too_few_realizations(self):
        with pytest.raises(NFTError, match="at least 2"):
            MCConfig(realizations=1)

    def test_bad_thread_count(self):
        with pytest.raises(NFTError, match="thread count"):
            MCConfig(threads=0)


class TestRunMC:
    def test_deterministic_in_seed(self, coarse):
        pulse, reference = coarse
        cfg = MCConfig(realizations=12, snr_db=10.0, seed=3)
        a = run_mc(pulse, reference, cfg)
        b = run_mc(pulse, reference, cfg)
        assert np.array_equal(a.C_emp, b.C_emp)
        assert np.array_equal(a.bias, b.bias)
        assert a.retained == b.retained

    def test_worker_count_does_not_change_results(self, coarse):
        pulse, reference = coarse
        serial = run_mc(pulse, reference, MCConfig(realizations=12, seed=3))
        pooled = run_mc(pulse, reference, MCConfig(realizations=12, seed=3, threads=2))
        assert np.array_equal(serial.C_emp, pooled.C_emp)
        assert np.array_equal(serial.lambdas_hat, pooled.lambdas_hat)

    def test_zero_noise_gives_zero_covariance(self, coarse):
        pulse, reference = coarse
        res = run_mc(pulse, reference,
                     MCConfig(realizations=4, snr_db=float("inf"), seed=0))
        assert res.sigma == 0.0
        assert np.max(np.abs(res.C_emp)) == 0.0
        assert np.max(np.abs(res.bias)) == 0.0
        assert res.outliers == 0

    def test_heavy_noise_sets_outlier_flag(self, coarse):
        pulse, reference = coarse
        res = run_mc(pulse, reference,
                     MCConfig(realizations=48, snr_db=3.0, seed=5))
        assert res.flag == OUTLIER_FLAG
        assert res.outlier_fraction > 0.10
        assert res.retained >= 2
        assert res.retained + res.outliers == 48

    def test_unmatchable_radius_raises(self, coarse):
        pulse, reference = coarse
        with pytest.raises(NFTError, match="matched realizations"):
            run_mc(pulse, reference,
                   MCConfig(realizations=4, snr_db=10.0, seed=0,
                            match_radius_factor=1e-9))

    def test_retained_samples_shape(self, coarse):
        pulse, reference = coarse
        res = run_mc(pulse, reference, MCConfig(realizations=12, seed=3))
        assert res.lambdas_hat.shape == (res.retained, 2)
        assert res.bs_hat.shape == (res.retained, 2)
        assert np.all(res.lambdas_hat.imag > 0)


def synthetic_pair():
    C_emp = np.diag([4e-4, 3e-4, 2e-4, 1e-4])
    result = MCResult(K=1, realizations=10, retained=10, outliers=0, sigma=0.1,
                      lambdas_hat=np.zeros((10, 1), dtype=complex),
                      bs_hat=np.zeros((10, 1), dtype=complex),
                      C_emp=C_emp, bias=np.zeros(4))
    C_lambda = np.diag([0.03, 0.02])
    C_b = np.diag([0.015, 0.005])
    C_cross = np.zeros((2, 2))
    C_full = np.block([[C_lambda, C_cross], [C_cross.T, C_b]])
    report = CovarianceReport(K=1, C_lambda=C_lambda, C_b=C_b,
                              C_cross=C_cross, C_full=C_full)
    return result, report


class TestCompareToAnalytic:
    def test_formulas_by_hand(self):
        result, report = synthetic_pair()
        cmp_ = compare_to_analytic(result, report)
        assert cmp_["frobenius_relative_error"] == pytest.approx(2.5 / 30.0)
        assert cmp_["max_entry_relative_error"] == pytest.approx(0.5)
        assert cmp_["sigma2_lambda_relative_error"][0] == pytest.approx(2.0 / 7.0)
        assert cmp_["sigma2_b_relative_error"][0] == pytest.approx(1.0 / 3.0)
        assert result.comparison is cmp_

    def test_scalar_accessors(self):
        result, _ = synthetic_pair()
        assert result.sigma2_lambda(0) == pytest.approx(7e-4)
        assert result.sigma2_b(0) == pytest.approx(3e-4)


class TestErrorSweep:
    def test_row_structure_and_refinement(self):
        spectrum = two_soliton_spectrum(0.0)
        rows = error_sweep(
            lambda grid: darboux(spectrum, grid)[0],
            spectrum, T=35.34, M_list=[65, 129])
        assert len(rows) == 2 * 2 * 2
        by_key = {(r.M, r.algorithm, r.k): r for r in rows}
        assert set(by_key) == {(M, alg, k) for M in (65, 129)
                               for alg in ("fc", "oracle") for k in (0, 1)}
        for r in rows:
            assert not r.failed
            assert 0.0 <= r.err_lambda < 1.0
            assert 0.0 <= r.err_b < 1.0
        for alg in ("fc", "oracle"):
            assert by_key[(129, alg, 0)].err_lambda < by_key[(65, alg, 0)].err_lambda

    def test_unresolvable_grid_marks_failed_rows(self):
        spectrum = two_soliton_spectrum(0.0)
        rows = error_sweep(
            lambda grid: Pulse(grid, np.zeros(grid.M, dtype=complex)),
            spectrum, T=35.34, M_list=[65])
        assert len(rows) == 4
        assert all(r.failed for r in rows)

    def test_csv_output(self, tmp_path):
        spectrum = two_soliton_spectrum(0.0)
        rows = error_sweep(
            lambda grid: darboux(spectrum, grid)[0],
            spectrum, T=35.34, M_list=[129], oracle=False)
        rows = rows + [type(rows[0])(M=5, algorithm="fc", k=0,
                                     err_lambda=float("nan"),
                                     err_b=float("nan"), failed=True)]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        with open(path, newline="") as fh:
            table = list(csv.reader(fh))
        assert table[0] == ["M", "algorithm", "k", "err_lambda", "err_b"]
        assert len(table) == 1 + 3
        assert table[-1][3] == "failed"
        assert float(table[1][3]) == rows[0].err_lambda

    def test_relative_error(self):
        assert relative_error(2.0, 2.0 + 2.0j) == pytest.approx(1.0)


@pytest.mark.slow
class TestStatisticalBehavior:
    def test_first_order_regime_is_nearly_gaussian(self):
        grid = TimeGrid(T=35.34, M=129)
        pulse, _ = darboux(two_soliton_spectrum(0.0), grid)
        windows = WindowSpec.hann(grid)
        _, modes = fc_modes(pulse, FCPolicy(count=2), windows)
        reference = DiscreteSpectrum(np.array([m.lam for m in modes]),
                                     np.array([m.b for m in modes]))
        res = run_mc(pulse, reference,
                     MCConfig(realizations=2048, snr_db=14.0, seed=7))
        dev = res.lambdas_hat[:, 0].real - reference.lambdas[0].real
        centred = dev - dev.mean()
        skew = np.mean(centred ** 3) / np.mean(centred ** 2) ** 1.5
        assert res.outlier_fraction < 0.01
        assert abs(skew) <= 0.2

    def test_estimate_stabilizes_with_more_realizations(self):
        grid = TimeGrid(T=35.34, M=65)
        pulse, _ = darboux(two_soliton_spectrum(0.0), grid)
        windows = WindowSpec.hann(grid)
        _, modes = fc_modes(pulse, FCPolicy(count=2), windows)
        reference = DiscreteSpectrum(np.array([m.lam for m in modes]),
                                     np.array([m.b for m in modes]))
        small = run_mc(pulse, reference,
                       MCConfig(realizations=512, snr_db=12.0, seed=3))
        large = run_mc(pulse, reference,
                       MCConfig(realizations=2048, snr_db=12.0, seed=3))
        v1, v2 = small.sigma2_lambda(0), large.sigma2_lambda(0)
        standard_error = np.sqrt(2.0 / 512 + 2.0 / 2048) * v2
        assert abs(v1 - v2) <= 3.0 * standard_error

    def test_five_soliton_variance_matches_analytic(self):
        preset = get_preset("5sol")
        grid = preset.grid()
        pulse = preset.build(grid)
        windows = WindowSpec.hann(grid)
        op, modes = fc_modes(pulse, FCPolicy(count=5), windows)
        reference = DiscreteSpectrum(np.array([m.lam for m in modes]),
                                     np.array([m.b for m in modes]))
        kits = [build_kit(op.L, m, grid, windows) for m in modes]
        report = covariance_report(
            kits, colored_covariance(NoiseModel(1.0), grid))
        res = run_mc(pulse, reference,
                     MCConfig(realizations=256, snr_db=8.0, seed=1))
        analytic = report.sigma2_lambda(0, res.sigma)
        assert abs(res.sigma2_lambda(0) - analytic) / analytic <= 0.30
