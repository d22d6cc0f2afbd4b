"""First-order statistics of the discrete spectrum under additive noise.

For a retained mode (lam, psi) of the collocation operator L, additive noise
q + sigma*q~ perturbs the operator by a Toeplitz-structured L~ built from the
noise coefficients c~. To first order,

    lam~ = phi^H L~ psi / (phi^H psi),      psi~ = -S L~ psi,

with P the rank-1 eigenprojector and S the Drazin inverse of (L - lam I) on
the complement of the eigendirection. The map c~ -> L~ psi is linear and is
realized by a single complex matrix Sigma acting on the stacked real vector
(Re c~, Im c~):

    Sigma = [[-j J2,      J2     ],
             [-j J1 Pi,  -J1 Pi  ]],

where J_i is Toeplitz in the eigenvector half psi_i and Pi is the index
reversal. Combining these gives sensitivity rows d (for lam~) and h (for the
windowed amplitude b~) such that both perturbations are plain dot products
with (Re c~, Im c~). Covariances of the stacked real spectral perturbations
then follow from the noise coefficient covariance R by congruence, stored at
unit sigma and scaled by sigma^2 at reporting time.

The left eigenvector never requires a second eigensolve: the operator's
persymmetry makes phi^H equal psi^T Pi, the reversed right eigenvector
without conjugation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve, toeplitz

from .collocation import FCMode, WindowSpec, truncation_time
from .signal import TWO_PI, NFTError, TimeGrid, _fmt


def eigenprojector(L: np.ndarray, mode: FCMode) -> np.ndarray:
    """Rank-1 spectral projector psi phi^H / (phi^H psi) for the mode."""
    psi = mode.psi
    phi = mode.phi
    denom = np.dot(np.conj(phi), psi)
    if abs(denom) < 1e-10 * np.linalg.norm(phi) * np.linalg.norm(psi):
        raise NFTError(
            f"near-defective eigenvalue at lambda={mode.lam:.6g}: "
            "left/right eigenvectors nearly orthogonal"
        )
    return np.outer(psi, np.conj(phi)) / denom


def drazin_inverse(L: np.ndarray, lam: complex, P: np.ndarray) -> np.ndarray:
    """Reduced resolvent S = (L - lam I - P)^{-1} (I - P)."""
    n = L.shape[0]
    A = L - lam * np.eye(n) - P
    try:
        lu = lu_factor(A)
        return lu_solve(lu, np.eye(n) - P)
    except np.linalg.LinAlgError as exc:
        raise NFTError(f"degenerate spectrum at lambda={lam:.6g}: {exc}") from exc


def _toeplitz_half(psi_half: np.ndarray, N: int) -> np.ndarray:
    """Banded Toeplitz matrix whose kernel is the eigenvector half."""
    zeros = np.zeros(N, dtype=np.complex128)
    first_col = np.concatenate([psi_half[N:], zeros])
    first_row = np.concatenate([psi_half[N::-1], zeros])
    return toeplitz(first_col, first_row)


def coupling_matrix(mode: FCMode, grid: TimeGrid) -> np.ndarray:
    """Matrix Sigma with L~ psi = Sigma (Re c~, Im c~) for any noise draw."""
    sigma, _, _ = _coupling_parts(mode, grid)
    return sigma


def _coupling_parts(mode: FCMode, grid: TimeGrid):
    N = grid.N
    j1 = _toeplitz_half(mode.psi1, N)
    j2 = _toeplitz_half(mode.psi2, N)
    j1_rev = j1[:, ::-1]  # J1 Pi, the column-reversed Toeplitz factor
    top = np.concatenate([-1j * j2, j2], axis=1)
    bottom = np.concatenate([-1j * j1_rev, -j1_rev], axis=1)
    return np.concatenate([top, bottom], axis=0), j1, j2


@dataclass
class ModePerturbationKit:
    """Everything needed to map noise draws to one mode's perturbations.

    d and h are the sensitivity rows: lam~ = d x and b~ = h x for
    x = (Re c~, Im c~). S is only materialized on request; h is computed
    through one adjoint solve against the LU factors of (L - lam I - P).
    """

    mode: FCMode
    grid: TimeGrid
    P: np.ndarray
    Sigma: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    d: np.ndarray
    h: np.ndarray
    denom: complex                    # phi^H psi
    S: np.ndarray | None = None
    lu: tuple = field(default=None, repr=False)


def sensitivity_rows(kit: ModePerturbationKit,
                     windows: WindowSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sensitivity rows (d, h) of the kit's mode for the given windows."""
    d = _lambda_row(kit)
    h = _amplitude_row(kit, windows)
    return d, h


def _lambda_row(kit: ModePerturbationKit) -> np.ndarray:
    phi_h = kit.mode.psi[::-1]  # phi^H as a row: reversed psi, no conjugation
    return (phi_h @ kit.Sigma) / kit.denom


def _window_vectors(mode: FCMode, grid: TimeGrid, windows: WindowSpec):
    t_k = truncation_time(mode.lam, grid, windows)
    shift = np.exp(1j * grid.indices * (TWO_PI / grid.T) * t_k)
    u1 = windows.w1 * np.conj(shift)
    u2 = windows.w2 * shift
    return u1, u2


def _amplitude_row(kit: ModePerturbationKit, windows: WindowSpec) -> np.ndarray:
    mode = kit.mode
    grid = kit.grid
    u1, u2 = _window_vectors(mode, grid, windows)
    den = np.dot(u1, mode.psi1)
    if abs(den) < 1e-12 * np.linalg.norm(mode.psi1):
        raise NFTError(
            f"unstable Jost normalization at lambda={mode.lam:.6g}: "
            "windowed psi_1 sum vanished"
        )
    b = mode.b if mode.b is not None else np.dot(u2, mode.psi2) / den
    r = np.concatenate([b * u1, -u2])
    # row r S Sigma via one transpose solve: r^T A^{-1} = solve(A^T, r)^T
    y = lu_solve(kit.lu, r, trans=1)
    row = y - kit.P.T @ y          # y^T (I - P), transposed back to a column
    return (row @ kit.Sigma) / den


def build_kit(L: np.ndarray, mode: FCMode, grid: TimeGrid,
              windows: WindowSpec, with_drazin: bool = False) -> ModePerturbationKit:
    """Assemble the perturbation kit for one retained mode."""
    P = eigenprojector(L, mode)
    n = L.shape[0]
    A = L - mode.lam * np.eye(n) - P
    try:
        lu = lu_factor(A)
    except np.linalg.LinAlgError as exc:
        raise NFTError(
            f"degenerate spectrum at lambda={mode.lam:.6g}: {exc}"
        ) from exc
    sigma, j1, j2 = _coupling_parts(mode, grid)
    denom = complex(np.dot(mode.psi[::-1], mode.psi))
    kit = ModePerturbationKit(
        mode=mode, grid=grid, P=P, Sigma=sigma, J1=j1, J2=j2,
        d=None, h=None, denom=denom, lu=lu,
    )
    kit.d = _lambda_row(kit)
    kit.h = _amplitude_row(kit, windows)
    if with_drazin:
        kit.S = lu_solve(lu, np.eye(n) - P)
    return kit


@dataclass(frozen=True)
class CovarianceReport:
    """Unit-sigma second-order statistics of the retained spectrum.

    Blocks are real covariances of the stacked perturbation vectors, ordered
    (Re of all modes, then Im of all modes) within each block, and
    (eigenvalues, then amplitudes) across blocks:

        C_full = [[C_lambda, C_cross], [C_cross^T, C_b]],  shape 4K x 4K.

    Stored at unit sigma: multiply by sigma^2 for physical covariances. The
    sigma field records the noise scale the report was requested for.
    """

    K: int
    C_lambda: np.ndarray
    C_b: np.ndarray
    C_cross: np.ndarray
    C_full: np.ndarray
    sigma: float | None = None

    def scaled_full(self, sigma: float | None = None) -> np.ndarray:
        s = self.sigma if sigma is None else sigma
        if s is None:
            raise NFTError("no sigma available to scale the covariance report")
        return s * s * self.C_full

    def sigma2_lambda(self, k: int, sigma: float | None = None) -> float:
        """Scalar spread Var(Re lam_k) + Var(Im lam_k), sigma^2 applied."""
        s = self._sigma(sigma)
        return s * s * float(self.C_lambda[k, k] + self.C_lambda[self.K + k, self.K + k])

    def sigma2_b(self, k: int, sigma: float | None = None) -> float:
        s = self._sigma(sigma)
        return s * s * float(self.C_b[k, k] + self.C_b[self.K + k, self.K + k])

    def cross_lambda(self, k: int, l: int, sigma: float | None = None) -> float:
        """Re part of the lam_k lam_l covariance, E[Re Re + Im Im], scaled."""
        s = self._sigma(sigma)
        return s * s * float(self.C_lambda[k, l] + self.C_lambda[self.K + k, self.K + l])

    def cross_b(self, k: int, l: int, sigma: float | None = None) -> float:
        s = self._sigma(sigma)
        return s * s * float(self.C_b[k, l] + self.C_b[self.K + k, self.K + l])

    def _sigma(self, sigma: float | None) -> float:
        s = self.sigma if sigma is None else sigma
        if s is None:
            raise NFTError("no sigma available to scale the covariance report")
        return s

    def summary(self, sigma: float | None = None, snr_db: float | None = None) -> dict:
        s = self._sigma(sigma)
        out = {
            "K": self.K,
            "sigma": s,
            "sigma2_lambda": [self.sigma2_lambda(k, s) for k in range(self.K)],
            "sigma2_b": [self.sigma2_b(k, s) for k in range(self.K)],
        }
        if snr_db is not None:
            out["snr_db"] = snr_db
        if self.K >= 2:
            out["re_sigma_lambda_12"] = self.cross_lambda(0, 1, s)
            out["re_sigma_b_12"] = self.cross_b(0, 1, s)
        return out


def covariance_report(kits: list[ModePerturbationKit], R_c: np.ndarray,
                      sigma: float | None = None) -> CovarianceReport:
    """Assemble the unit-sigma covariance blocks from per-mode sensitivities."""
    K = len(kits)
    if K == 0:
        raise NFTError("covariance report needs at least one mode kit")
    D = np.vstack([kit.d for kit in kits])
    H = np.vstack([kit.h for kit in kits])
    Dr = np.vstack([D.real, D.imag])
    Hr = np.vstack([H.real, H.imag])
    RDr = R_c @ Dr.T
    RHr = R_c @ Hr.T
    c_lambda = Dr @ RDr
    c_b = Hr @ RHr
    c_cross = Dr @ RHr
    c_lambda = (c_lambda + c_lambda.T) / 2.0
    c_b = (c_b + c_b.T) / 2.0
    c_full = np.block([[c_lambda, c_cross], [c_cross.T, c_b]])
    return CovarianceReport(K, c_lambda, c_b, c_cross, c_full, sigma)


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    """Row-major CSV with 17-significant-digit decimals."""
    with open(path, "w") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(_fmt(float(x)) for x in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        rows = [[float(x) for x in line.strip().split(",")]
                for line in fh if line.strip()]
    return np.array(rows)


def export_report(report: CovarianceReport, directory,
                  sigma: float | None = None, snr_db: float | None = None) -> None:
    """Write the covariance blocks as CSV plus a JSON scalar summary.

    Matrices are exported at unit sigma (as stored); the JSON summary carries
    the sigma^2-scaled per-mode scalars.
    """
    import os

    os.makedirs(directory, exist_ok=True)
    write_matrix_csv(report.C_lambda, os.path.join(directory, "C_lambda.csv"))
    write_matrix_csv(report.C_b, os.path.join(directory, "C_b.csv"))
    write_matrix_csv(report.C_cross, os.path.join(directory, "C_cross.csv"))
    write_matrix_csv(report.C_full, os.path.join(directory, "C_full.csv"))
    with open(os.path.join(directory, "summary.json"), "w") as fh:
        json.dump(report.summary(sigma, snr_db), fh, indent=2)
        fh.write("\n")
