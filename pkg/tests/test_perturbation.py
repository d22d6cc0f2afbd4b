"""Eigenprojectors, reduced resolvents, coupling rows, covariance reports."""

import math

import numpy as np
import pytest
from scipy.linalg import toeplitz

from nftkit.collocation import FCMode, FCPolicy, WindowSpec, fc_modes
from nftkit.darboux import darboux
from nftkit.perturbation import (build_kit, coupling_matrix,
                                 covariance_report, drazin_inverse,
                                 eigenprojector, export_report,
                                 read_matrix_csv, write_matrix_csv)
from nftkit.presets import two_soliton_spectrum
from nftkit.signal import (NFTError, NoiseModel, Pulse, TimeGrid,
                           colored_covariance, sample_awgn)


@pytest.fixture(scope="module")
def small_kit_run():
    grid = TimeGrid(T=35.34, M=129)
    pulse, _ = darboux(two_soliton_spectrum(0.25 * 2 * np.pi), grid)
    windows = WindowSpec.hann(grid)
    op, modes = fc_modes(pulse, FCPolicy(count=2), windows)
    kits = [build_kit(op.L, m, grid, windows, with_drazin=True) for m in modes]
    return grid, pulse, windows, op, modes, kits


def noise_operator(c: np.ndarray, N: int) -> np.ndarray:
    """Explicitly assembled operator perturbation for noise coefficients c."""
    zeros = np.zeros(N, dtype=complex)
    first_col = -1j * np.concatenate([c[N:], zeros])
    first_row = -1j * np.concatenate([c[N::-1], zeros])
    gamma = toeplitz(first_col, first_row)
    M = len(c)
    block = np.zeros((2 * M, 2 * M), dtype=complex)
    block[:M, M:] = gamma
    block[M:, :M] = -gamma.conj().T
    return block


class TestEigenprojector:
    def test_projector_identities(self, small_kit_run):
        _, _, _, op, modes, kits = small_kit_run
        for m, kit in zip(modes, kits):
            P = kit.P
            scale = np.linalg.norm(P)
            assert np.linalg.norm(P @ P - P) <= 1e-10 * scale
            assert np.trace(P) == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.norm(P @ m.psi - m.psi) <= 1e-10 * np.linalg.norm(m.psi)
            phi_h = np.conj(m.phi)
            assert np.linalg.norm(phi_h @ P - phi_h) <= 1e-10 * np.linalg.norm(phi_h)

    def test_near_defective_rejected(self):
        L = np.diag([1.0 + 0j, 2.0])
        mode = FCMode(lam=1.0 + 0j,
                      psi=np.array([1.0 + 0j, 0.0]),
                      phi=np.array([0.0 + 0j, 1.0]))
        with pytest.raises(NFTError, match="near-defective"):
            eigenprojector(L, mode)


class TestDrazinInverse:
    def test_reduced_resolvent_relations(self, small_kit_run):
        _, _, _, op, modes, kits = small_kit_run
        n = op.L.shape[0]
        for m, kit in zip(modes, kits):
            S = kit.S
            P = kit.P
            A = op.L - m.lam * np.eye(n)
            scale = np.linalg.norm(S) * np.linalg.norm(A)
            complement = np.eye(n) - P
            assert np.linalg.norm(S @ A - complement) <= 1e-10 * scale
            assert np.linalg.norm(A @ S - complement) <= 1e-10 * scale
            assert np.linalg.norm(S @ P) <= 1e-10 * np.linalg.norm(S)
            assert np.linalg.norm(P @ S) <= 1e-10 * np.linalg.norm(S)
            assert np.linalg.norm(S @ m.psi) <= 1e-10 * np.linalg.norm(S)

    def test_matches_standalone_function(self, small_kit_run):
        _, _, _, op, modes, kits = small_kit_run
        m, kit = modes[0], kits[0]
        S = drazin_inverse(op.L, m.lam, kit.P)
        np.testing.assert_allclose(S, kit.S, atol=1e-12 * np.linalg.norm(kit.S))


class TestCouplingMatrix:
    def test_defining_identity(self, small_kit_run):
        grid, _, _, op, modes, kits = small_kit_run
        rng = np.random.default_rng(11)
        for m, kit in zip(modes, kits):
            sigma = coupling_matrix(m, grid)
            np.testing.assert_allclose(sigma, kit.Sigma, atol=0)
            for _ in range(100):
                c = rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M)
                x = np.concatenate([c.real, c.imag])
                via_sigma = sigma @ x
                explicit = noise_operator(c, grid.N) @ m.psi
                np.testing.assert_allclose(
                    via_sigma, explicit,
                    atol=1e-12 * np.linalg.norm(explicit))

    def test_lambda_row_matches_rayleigh_quotient(self, small_kit_run):
        grid, _, _, op, modes, kits = small_kit_run
        rng = np.random.default_rng(12)
        for m, kit in zip(modes, kits):
            phi_h = np.conj(m.phi)
            denom = phi_h @ m.psi
            for _ in range(100):
                c = rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M)
                x = np.concatenate([c.real, c.imag])
                predicted = kit.d @ x
                explicit = phi_h @ (noise_operator(c, grid.N) @ m.psi) / denom
                assert abs(predicted - explicit) <= 1e-10 * abs(m.lam)


class TestFirstOrderAccuracy:
    def test_rows_predict_perturbations_to_second_order(self, small_kit_run):
        grid, pulse, windows, op, modes, kits = small_kit_run
        draw = sample_awgn(grid, 99)
        coeff = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(draw))) / grid.M
        x = np.concatenate([coeff.real, coeff.imag])

        def residuals(sigma_level):
            noisy = Pulse(grid, pulse.samples + sigma_level * draw)
            _, noisy_modes = fc_modes(noisy, FCPolicy(count=2), windows)
            out = []
            for m, kit, nm in zip(modes, kits, noisy_modes):
                out.append(abs(nm.lam - m.lam - sigma_level * (kit.d @ x)))
                out.append(abs(nm.b - m.b - sigma_level * (kit.h @ x)))
            return np.array(out)

        r1 = residuals(4e-3)
        r2 = residuals(2e-3)
        ratios = r1 / r2
        assert np.all(ratios > 3.0)
        assert np.all(ratios < 5.0)


class TestCovarianceReport:
    def test_block_assembly(self, small_kit_run):
        grid, _, _, _, _, kits = small_kit_run
        R = colored_covariance(NoiseModel(1.0), grid)
        rep = covariance_report(kits, R)
        K = rep.K
        np.testing.assert_allclose(rep.C_full[:2 * K, :2 * K], rep.C_lambda)
        np.testing.assert_allclose(rep.C_full[2 * K:, 2 * K:], rep.C_b)
        np.testing.assert_allclose(rep.C_full[:2 * K, 2 * K:], rep.C_cross)
        D = np.vstack([k.d for k in kits])
        Dr = np.vstack([D.real, D.imag])
        np.testing.assert_allclose(rep.C_lambda, Dr @ Dr.T / (2 * grid.M),
                                   atol=1e-14)

    def test_positive_semidefinite(self, small_kit_run):
        grid, _, _, _, _, kits = small_kit_run
        rep = covariance_report(kits, colored_covariance(NoiseModel(1.0), grid))
        eigs = np.linalg.eigvalsh(rep.C_full)
        assert eigs.min() >= -1e-10 * np.linalg.norm(rep.C_full)

    def test_alpha_mirror_symmetry(self):
        def l1_variance(alpha):
            grid = TimeGrid(T=35.34, M=129)
            pulse, _ = darboux(two_soliton_spectrum(alpha), grid)
            win = WindowSpec.hann(grid)
            op, modes = fc_modes(pulse, FCPolicy(count=2), win)
            kits = [build_kit(op.L, m, grid, win) for m in modes]
            rep = covariance_report(kits, colored_covariance(NoiseModel(1.0), grid))
            return rep.sigma2_lambda(0, 1.0), rep.sigma2_b(0, 1.0)

        for alpha in (0.3, 1.1):
            l_a, b_a = l1_variance(alpha)
            l_m, b_m = l1_variance(2.0 * math.pi - alpha)
            assert abs(l_a - l_m) <= 1e-10 * l_a
            assert abs(b_a - b_m) <= 1e-8 * b_a

    def test_zero_noise_covariance(self, small_kit_run):
        grid, _, _, _, _, kits = small_kit_run
        rep = covariance_report(kits, np.zeros((2 * grid.M, 2 * grid.M)))
        assert np.max(np.abs(rep.C_full)) == 0.0

    def test_empty_kits_rejected(self):
        with pytest.raises(NFTError):
            covariance_report([], np.eye(4))

    def test_sigma_scaling(self, small_kit_run):
        grid, _, _, _, _, kits = small_kit_run
        R = colored_covariance(NoiseModel(1.0), grid)
        rep = covariance_report(kits, R, sigma=0.5)
        np.testing.assert_allclose(rep.scaled_full(), 0.25 * rep.C_full)
        assert rep.sigma2_lambda(0) == pytest.approx(
            0.25 * (rep.C_lambda[0, 0] + rep.C_lambda[rep.K, rep.K]))
        bare = covariance_report(kits, R)
        with pytest.raises(NFTError):
            bare.scaled_full()

    def test_summary_contents(self, small_kit_run):
        grid, _, _, _, _, kits = small_kit_run
        rep = covariance_report(kits, colored_covariance(NoiseModel(1.0), grid))
        s = rep.summary(sigma=0.1, snr_db=10.0)
        assert s["K"] == 2
        assert len(s["sigma2_lambda"]) == 2
        assert len(s["sigma2_b"]) == 2
        assert s["snr_db"] == 10.0
        assert "re_sigma_lambda_12" in s
        assert "re_sigma_b_12" in s


class TestExport:
    def test_matrix_csv_round_trip(self, tmp_path):
        m = np.array([[1.0, -2.5e-17], [math.pi, 3.0]])
        path = tmp_path / "m.csv"
        write_matrix_csv(m, path)
        np.testing.assert_array_equal(read_matrix_csv(path), m)

    def test_report_export(self, small_kit_run, tmp_path):
        import json

        grid, _, _, _, _, kits = small_kit_run
        rep = covariance_report(kits, colored_covariance(NoiseModel(1.0), grid))
        export_report(rep, tmp_path, sigma=0.2, snr_db=12.0)
        for name in ("C_lambda", "C_b", "C_cross", "C_full"):
            loaded = read_matrix_csv(tmp_path / f"{name}.csv")
            np.testing.assert_array_equal(loaded, getattr(rep, name))
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["sigma"] == 0.2
        assert summary["snr_db"] == 12.0
