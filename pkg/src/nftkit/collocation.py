"""Forward NFT by Fourier collocation.

The scattering problem is recast as a dense non-Hermitian eigenproblem on the
pulse's Fourier coefficients. With c[n] the coefficients and
omega_n = -(2 pi / T) n, the collocation operator is the 2M x 2M block matrix

    L = [[ Omega,  Gamma ],
         [ -Gamma^H, -Omega ]],

where Omega = diag(omega_{-N} .. omega_N) and Gamma is Toeplitz in the
coefficients, Gamma[p, s] = -j c[p - s] for |p - s| <= N. Eigenvalues of L
with significant positive imaginary part approximate the discrete spectrum;
the eigenvector halves (psi_1, psi_2) are Fourier coefficients of the two
Jost components, and the spectral amplitude follows from windowed evaluation
of the eigenvector at a truncation time T_k:

    b_k = sum_n w2[n] psi_2[n] e^{+j n (2 pi/T) T_k}
        / sum_n w1[n] psi_1[n] e^{-j n (2 pi/T) T_k}.

The ratio is invariant to the eigenvector's arbitrary scale and phase. The
Hann taper and tail truncation suppress the ringing the hard window edges
would otherwise leak into b_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .darboux import DiscreteSpectrum
from .signal import (
    TWO_PI,
    FourierCoefficients,
    NFTError,
    Pulse,
    TimeGrid,
    dft_coefficients,
)


@dataclass(frozen=True)
class FCOperator:
    """Assembled collocation operator with its diagonal and Toeplitz parts."""

    grid: TimeGrid
    L: np.ndarray       # 2M x 2M
    Omega: np.ndarray   # length M, the diagonal of the upper-left block
    Gamma: np.ndarray   # M x M Toeplitz block


@dataclass
class FCMode:
    """One retained eigenpair with its extracted amplitude.

    psi is the unit-norm right eigenvector; phi the flip-conjugate left
    eigenvector; b and window_meta are filled by :func:`extract_b`.
    """

    lam: complex
    psi: np.ndarray
    phi: np.ndarray
    b: complex | None = None
    window_meta: tuple[float, str] | None = None

    @property
    def psi1(self) -> np.ndarray:
        return self.psi[: self.psi.size // 2]

    @property
    def psi2(self) -> np.ndarray:
        return self.psi[self.psi.size // 2 :]


@dataclass(frozen=True)
class WindowSpec:
    """Window arrays and truncation-time policy for amplitude extraction.

    T_k = min(exp_constant / Im(lambda), T/2 - tail_fraction * T).
    """

    kind: str
    w1: np.ndarray
    w2: np.ndarray
    exp_constant: float = 12.0
    tail_fraction: float = 0.05

    @classmethod
    def hann(cls, grid: TimeGrid, exp_constant: float = 12.0,
             tail_fraction: float = 0.05) -> "WindowSpec":
        w = 0.5 * (1.0 + np.cos(TWO_PI * grid.indices / grid.M))
        return cls("hann", w, w.copy(), exp_constant, tail_fraction)

    @classmethod
    def rectangular(cls, grid: TimeGrid, exp_constant: float = 12.0,
                    tail_fraction: float = 0.05) -> "WindowSpec":
        w = np.ones(grid.M)
        return cls("rect", w, w.copy(), exp_constant, tail_fraction)


@dataclass(frozen=True)
class FCPolicy:
    """Spurious-mode rejection policy.

    Eigenvalues with Im(lambda) > tau_im are retained; if count is given, the
    count eigenvalues of largest imaginary part are kept instead (still
    requiring Im > tau_im), which is the right policy when the caller knows
    how many discrete modes to expect.
    """

    tau_im: float = 1e-2
    count: int | None = None


def build_operator(coeffs: FourierCoefficients) -> FCOperator:
    """Assemble the 2M x 2M collocation operator from Fourier coefficients."""
    grid = coeffs.grid
    n = grid.indices
    omega = -(TWO_PI / grid.T) * n
    c = coeffs.coeffs
    N = grid.N
    # Logical index 0 of c sits at array position N.
    first_col = -1j * np.concatenate([c[N:], np.zeros(N)])
    first_row = -1j * np.concatenate([c[N::-1], np.zeros(N)])
    gamma = toeplitz(first_col, first_row)
    upper = np.concatenate([np.diag(omega), gamma], axis=1)
    lower = np.concatenate([-gamma.conj().T, -np.diag(omega)], axis=1)
    L = np.concatenate([upper, lower], axis=0)
    return FCOperator(grid, L, omega, gamma)


def solve_modes(op: FCOperator) -> tuple[np.ndarray, np.ndarray]:
    """All 2M eigenpairs of the operator.

    Returns (lam, V) with V[:, i] the unit-norm right eigenvector of lam[i],
    phase-rotated so its largest-magnitude entry is positive real. The
    normalization only pins down reproducible intermediates; every published
    quantity is invariant to it.
    """
    try:
        lam, V = np.linalg.eig(op.L)
    except np.linalg.LinAlgError as exc:
        raise NFTError(f"eigensolver did not converge: {exc}") from exc
    norms = np.linalg.norm(V, axis=0)
    V = V / norms
    idx = np.argmax(np.abs(V), axis=0)
    piv = V[idx, np.arange(V.shape[1])]
    V = V * (np.conj(piv) / np.abs(piv))
    return lam, V


def left_eigenvector(psi: np.ndarray) -> np.ndarray:
    """Flip-conjugate left eigenvector: (psi2*[N..-N], psi1*[N..-N])."""
    return np.conj(psi[::-1])


def filter_discrete(lam: np.ndarray, V: np.ndarray,
                    policy: FCPolicy | None = None) -> list[FCMode]:
    """Retain discrete-spectrum candidates, sorted by descending Im(lambda)."""
    policy = policy or FCPolicy()
    above = np.flatnonzero(lam.imag > policy.tau_im)
    if policy.count is not None and above.size < policy.count:
        raise NFTError(
            f"insufficient discrete modes: {above.size} above threshold, "
            f"expected {policy.count}"
        )
    order = above[np.argsort(-lam.imag[above])]
    if policy.count is not None:
        order = order[: policy.count]
    modes = []
    for i in order:
        psi = V[:, i].copy()
        modes.append(FCMode(complex(lam[i]), psi, left_eigenvector(psi)))
    return modes


def truncation_time(lam: complex, grid: TimeGrid,
                    windows: WindowSpec) -> float:
    """Tail-truncation time T_k = min(exp_constant/Im lam, T/2 - tail_fraction*T)."""
    if not lam.imag > 0:
        raise NFTError(f"truncation time needs Im(lambda) > 0, got {lam}")
    t_exp = windows.exp_constant / lam.imag
    t_tail = grid.T / 2.0 - windows.tail_fraction * grid.T
    return min(t_exp, t_tail)


def extract_b(mode: FCMode, windows: WindowSpec, grid: TimeGrid) -> complex:
    """Spectral amplitude from the windowed, truncated eigenvector ratio.

    Fills mode.b and mode.window_meta and returns b.
    """
    t_k = truncation_time(mode.lam, grid, windows)
    n = grid.indices
    shift = np.exp(1j * n * (TWO_PI / grid.T) * t_k)
    num = np.sum(windows.w2 * mode.psi2 * shift)
    den = np.sum(windows.w1 * mode.psi1 * np.conj(shift))
    if abs(den) < 1e-12 * np.linalg.norm(mode.psi1):
        raise NFTError(
            f"unstable Jost normalization at lambda={mode.lam:.6g}: "
            "windowed psi_1 sum vanished"
        )
    b = complex(num / den)
    mode.b = b
    mode.window_meta = (t_k, windows.kind)
    return b


def fc_modes(pulse: Pulse, policy: FCPolicy | None = None,
             windows: WindowSpec | None = None) -> tuple[FCOperator, list[FCMode]]:
    """Full pipeline returning the operator and retained modes with amplitudes."""
    windows = windows or WindowSpec.hann(pulse.grid)
    op = build_operator(dft_coefficients(pulse))
    lam, V = solve_modes(op)
    modes = filter_discrete(lam, V, policy)
    for mode in modes:
        extract_b(mode, windows, pulse.grid)
    return op, modes


def forward_nft(pulse: Pulse, policy: FCPolicy | None = None,
                windows: WindowSpec | None = None) -> DiscreteSpectrum:
    """Discrete spectrum of a sampled pulse by Fourier collocation."""
    _, modes = fc_modes(pulse, policy, windows)
    return DiscreteSpectrum(
        np.array([m.lam for m in modes]),
        np.array([m.b for m in modes]),
    )
