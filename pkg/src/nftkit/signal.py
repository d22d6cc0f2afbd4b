"""Time grids, sampled pulses, Fourier coefficients, noise, and pulse file I/O.

Conventions used throughout the package:

* grids are uniform with an odd number of samples M = 2N+1 on t_m = m*T/M,
  m in {-N, ..., N}, so the samples sit strictly inside [-T/2, T/2];
* all logically indexed arrays (samples q[m], coefficients c[n]) are stored
  in ascending index order, i.e. array position 0 holds index -N;
* the forward DFT carries the 1/M factor: c[n] = (1/M) sum_m q[m] e^{-j2pi m n/M};
* complex Gaussian noise has unit total variance, 1/2 per quadrature, so the
  stacked real coefficient vector (Re c, Im c) of white noise has covariance
  (1/2M) * I.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class NFTError(Exception):
    """Numerical or domain failure in the NFT pipeline."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid on [-T/2, T/2] with an odd sample count.

    Parameters
    ----------
    T : float
        Window duration in normalized time units.
    M : int
        Number of samples, odd and >= 3.
    """

    T: float
    M: int

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise NFTError(f"grid duration must be positive and finite, got T={self.T}")
        if self.M < 3 or self.M % 2 == 0:
            raise NFTError(f"sample count must be odd and >= 3, got M={self.M}")

    @property
    def N(self) -> int:
        """Half-bandwidth index, M = 2N+1."""
        return (self.M - 1) // 2

    @property
    def dt(self) -> float:
        return self.T / self.M

    @property
    def indices(self) -> np.ndarray:
        """Logical indices m (or n) in ascending order, -N..N."""
        return np.arange(-self.N, self.N + 1)

    @property
    def times(self) -> np.ndarray:
        """Sample times t_m = m*T/M."""
        return self.indices * (self.T / self.M)


@dataclass(frozen=True)
class Pulse:
    """Complex samples q[m] of a pulse on a TimeGrid."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        q = np.array(self.samples, dtype=np.complex128, copy=True, order="C")
        if q.shape != (self.grid.M,):
            raise NFTError(
                f"sample count {q.shape} does not match grid M={self.grid.M}"
            )
        if not np.all(np.isfinite(q.view(np.float64))):
            raise NFTError("pulse samples must be finite")
        object.__setattr__(self, "samples", _readonly(q))

    @property
    def energy(self) -> float:
        """Sum of |q[m]|^2 (per-sample power sum, no dt weight)."""
        return float(np.sum(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class FourierCoefficients:
    """Fourier coefficients c[n], n in {-N..N}, of a sampled pulse."""

    grid: TimeGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True, order="C")
        if c.shape != (self.grid.M,):
            raise NFTError(
                f"coefficient count {c.shape} does not match grid M={self.grid.M}"
            )
        if not np.all(np.isfinite(c.view(np.float64))):
            raise NFTError("Fourier coefficients must be finite")
        object.__setattr__(self, "coeffs", _readonly(c))


def dft_coefficients(pulse: Pulse) -> FourierCoefficients:
    """Forward DFT of the samples, c[n] = (1/M) sum_m q[m] e^{-j2pi mn/M}."""
    q = pulse.samples
    c = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(q))) / pulse.grid.M
    return FourierCoefficients(pulse.grid, c)


def inverse_dft(coeffs: FourierCoefficients) -> Pulse:
    """Inverse of :func:`dft_coefficients`, q[m] = sum_n c[n] e^{+j2pi mn/M}."""
    c = coeffs.coeffs
    q = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(c))) * coeffs.grid.M
    return Pulse(coeffs.grid, q)


def sample_awgn(grid: TimeGrid, rng_seed: int) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples, deterministic in the seed.

    Each sample has E|q~[m]|^2 = 1 with variance 1/2 per quadrature.
    """
    rng = np.random.default_rng(rng_seed)
    re = rng.standard_normal(grid.M)
    im = rng.standard_normal(grid.M)
    return (re + 1j * im) / math.sqrt(2.0)


def sigma_from_snr(pulse: Pulse, snr_db: float) -> float:
    """Noise scale sigma for a target SNR, with SNR = sum|q[m]|^2 / (M sigma^2)."""
    e = pulse.energy
    if e <= 0.0:
        raise NFTError("degenerate pulse: zero energy, SNR undefined")
    if math.isinf(snr_db):
        return 0.0
    return math.sqrt(e / (pulse.grid.M * 10.0 ** (snr_db / 10.0)))


@dataclass(frozen=True)
class NoiseModel:
    """Additive complex Gaussian noise, white or shaped.

    Parameters
    ----------
    sigma : float
        Amplitude scale applied to the unit-variance noise.
    shaping : ndarray or None
        Real 2M x 2M matrix G applied to the stacked (Re c, Im c) coefficient
        vector; None selects white noise. G must satisfy trace(G G^T) = 2M so
        the total coefficient power stays normalized.
    """

    sigma: float
    shaping: np.ndarray | None = None

    def __post_init__(self):
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise NFTError(f"noise scale must be finite and >= 0, got {self.sigma}")
        if self.shaping is not None:
            g = np.array(self.shaping, dtype=np.float64, copy=True, order="C")
            if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2 != 0:
                raise NFTError("invalid shaping matrix: expected square 2M x 2M")
            object.__setattr__(self, "shaping", _readonly(g))

    @property
    def is_white(self) -> bool:
        return self.shaping is None


def colored_covariance(noise: NoiseModel, grid: TimeGrid) -> np.ndarray:
    """Covariance R of the stacked (Re c, Im c) noise coefficient vector.

    White noise gives (1/2M) I; shaped noise gives (1/2M) G G^T after checking
    the trace normalization trace(G G^T) = 2M.
    """
    two_m = 2 * grid.M
    if noise.is_white:
        return np.eye(two_m) / two_m
    g = noise.shaping
    if g.shape != (two_m, two_m):
        raise NFTError(
            f"invalid shaping matrix: shape {g.shape} does not match 2M={two_m}"
        )
    gram = g @ g.T
    tr = float(np.trace(gram))
    if abs(tr - two_m) > 1e-9 * two_m:
        raise NFTError(
            f"invalid shaping matrix: trace(G G^T)={tr:.6g}, expected {two_m}"
        )
    r = gram / two_m
    return (r + r.T) / 2.0


def sample_noise(noise: NoiseModel, grid: TimeGrid, rng_seed: int) -> np.ndarray:
    """One unit-scale noise realization q~[m] consistent with the model's R.

    White noise is drawn directly in the time domain. Shaped noise is drawn on
    the stacked real coefficient vector, (Re c, Im c) = G w with w iid
    N(0, 1/2M), and transformed back, so both paths produce coefficients with
    the model covariance.
    """
    if noise.is_white:
        return sample_awgn(grid, rng_seed)
    two_m = 2 * grid.M
    if noise.shaping.shape != (two_m, two_m):
        raise NFTError(
            f"invalid shaping matrix: shape {noise.shaping.shape} "
            f"does not match 2M={two_m}"
        )
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal(two_m) / math.sqrt(two_m)
    x = noise.shaping @ w
    c = x[: grid.M] + 1j * x[grid.M :]
    return inverse_dft(FourierCoefficients(grid, c)).samples


# ---------------------------------------------------------------------------
# Pulse file format:
#   line 1: "# nft-pulse v1 T=<decimal> M=<integer>"
#   then M lines "<t>,<re>,<im>", index order m = -N..N, 17 significant digits.
# ---------------------------------------------------------------------------

_PULSE_HEADER = re.compile(r"^# nft-pulse v1 T=(\S+) M=(\d+)\s*$")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_pulse(pulse: Pulse, path) -> None:
    """Write a pulse file with full round-trip decimal precision."""
    grid = pulse.grid
    t = grid.times
    with open(path, "w") as fh:
        fh.write(f"# nft-pulse v1 T={_fmt(grid.T)} M={grid.M}\n")
        for m in range(grid.M):
            q = pulse.samples[m]
            fh.write(f"{_fmt(t[m])},{_fmt(q.real)},{_fmt(q.imag)}\n")


def read_pulse(path) -> Pulse:
    """Read a pulse file, validating the header and sample finiteness."""
    with open(path) as fh:
        header = fh.readline()
        m = _PULSE_HEADER.match(header)
        if m is None:
            raise NFTError(f"malformed pulse file header: {header!r}")
        T = float(m.group(1))
        M = int(m.group(2))
        if M % 2 == 0:
            raise NFTError(f"pulse file has even sample count M={M}")
        grid = TimeGrid(T, M)
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise NFTError(f"malformed pulse file line: {line!r}")
            rows.append((float(parts[1]), float(parts[2])))
        if len(rows) != M:
            raise NFTError(f"pulse file has {len(rows)} samples, header says M={M}")
        q = np.array([complex(re_, im_) for re_, im_ in rows])
        if not np.all(np.isfinite(q.view(np.float64))):
            raise NFTError("pulse file contains non-finite samples")
        return Pulse(grid, q)
