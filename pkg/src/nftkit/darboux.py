"""K-soliton synthesis by the Darboux transform, with Jost solutions.

The transform iterates over the prescribed eigenvalues, dressing the zero
potential one eigenvalue at a time. At step i the seed solution f = v_i of the
previous potential updates the signal and every remaining seed:

    q   <- q - 2j (l_i - l_i*) conj(f2) f1 / (|f1|^2 + |f2|^2)
    v_k <- [(l_k - l_i*) I - (l_i - l_i*) f f^H / (|f1|^2 + |f2|^2)] v_k,  k != i

while v_i itself is replaced by the dressed solution at its own eigenvalue,
scaled by a constant built from the b coefficients and eigenvalue spacings.
The output v_k are the Jost solutions of the final K-soliton, normalized to
the standard scattering boundary conditions: v1 e^{+j l t} -> 1 at the left
edge and v2 e^{-j l t} -> b_k at the right edge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .signal import NFTError, Pulse, TimeGrid, _fmt, _readonly

# Natural-log scale of the double-precision representable range; exponentials
# e^{Im(l) T/2} beyond this overflow.
_LOG_OVERFLOW = 700.0

# Eigenvalues closer than this are treated as coincident (the transform and
# the perturbation theory both assume multiplicity 1).
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Discrete spectrum entries (lambda_k, b_k), all lambda_k in C+."""

    lambdas: np.ndarray
    bs: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.array(self.lambdas, dtype=np.complex128, copy=True))
        b = np.atleast_1d(np.array(self.bs, dtype=np.complex128, copy=True))
        if lam.shape != b.shape or lam.ndim != 1:
            raise NFTError("spectrum eigenvalue and amplitude lists must match")
        if lam.size:
            if np.any(lam.imag <= 0):
                raise NFTError("eigenvalue not in upper half-plane")
            if np.any(b == 0):
                raise NFTError("zero spectral amplitude b_k")
            diffs = np.abs(lam[:, None] - lam[None, :])
            np.fill_diagonal(diffs, np.inf)
            if diffs.min() < DEGENERACY_TOL:
                raise NFTError("degenerate spectrum: coincident eigenvalues")
        object.__setattr__(self, "lambdas", _readonly(lam))
        object.__setattr__(self, "bs", _readonly(b))

    @property
    def K(self) -> int:
        return self.lambdas.size


@dataclass(frozen=True)
class JostSolutions:
    """Jost solutions v(t_m, lambda_k) on the grid, one row per eigenvalue."""

    grid: TimeGrid
    lambdas: np.ndarray
    v1: np.ndarray  # shape (K, M)
    v2: np.ndarray  # shape (K, M)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", _readonly(np.array(self.lambdas, copy=True)))
        object.__setattr__(self, "v1", _readonly(np.array(self.v1, copy=True)))
        object.__setattr__(self, "v2", _readonly(np.array(self.v2, copy=True)))


def darboux(spectrum: DiscreteSpectrum, grid: TimeGrid) -> tuple[Pulse, JostSolutions]:
    """Synthesize the K-soliton pulse and its Jost solutions on the grid."""
    lam = spectrum.lambdas
    bs = spectrum.bs
    K = spectrum.K
    if K and np.max(np.abs(lam.imag)) * grid.T / 2.0 > _LOG_OVERFLOW:
        raise NFTError("grid too wide for spectrum: seed exponentials overflow")

    t = grid.times
    v = np.empty((K, 2, grid.M), dtype=np.complex128)
    for k in range(K):
        v[k, 0] = np.exp(-1j * lam[k] * t)
        v[k, 1] = -bs[k] * np.exp(1j * lam[k] * t)
    q = np.zeros(grid.M, dtype=np.complex128)

    for i in range(K):
        f1 = v[i, 0].copy()
        f2 = v[i, 1].copy()
        den = np.abs(f1) ** 2 + np.abs(f2) ** 2
        jump = lam[i] - np.conj(lam[i])  # 2j Im(lambda_i)
        q = q - 2j * jump * np.conj(f2) * f1 / den

        c_i = bs[i]
        for k in range(i):
            c_i = c_i * (lam[i] - lam[k])
        for k in range(i + 1, K):
            c_i = c_i / (lam[i] - np.conj(lam[k]))

        cross = jump * np.conj(f2) * f1 / den
        proj1 = jump * np.abs(f1) ** 2 / den
        for k in range(K):
            if k == i:
                v[i, 0] = c_i / den * (-np.conj(f2))
                v[i, 1] = c_i / den * np.conj(f1)
            else:
                a1 = v[k, 0].copy()
                a2 = v[k, 1].copy()
                # jump is purely imaginary, so conj(cross) = -jump conj(f1) f2 / den
                # and the lower-left coefficient -jump f2 conj(f1) / den is +conj(cross).
                v[k, 0] = (lam[k] - np.conj(lam[i]) - proj1) * a1 - cross * a2
                v[k, 1] = np.conj(cross) * a1 + (lam[k] - lam[i] + proj1) * a2

    jost = JostSolutions(grid, lam.copy(), v[:, 0, :].copy(), v[:, 1, :].copy())
    return Pulse(grid, q), jost


def sech_pulse(amplitude: float, grid: TimeGrid) -> Pulse:
    """Analytic pulse q(t) = amplitude * sech(t) sampled on the grid."""
    if not amplitude > 0:
        raise NFTError(f"sech amplitude must be positive, got {amplitude}")
    return Pulse(grid, amplitude / np.cosh(grid.times) + 0j)


def soliton_a_coefficient(spectrum: DiscreteSpectrum, lam: complex) -> complex:
    """Scattering coefficient a(lambda) of a multi-soliton.

    For a reflectionless pulse a is the Blaschke product over the discrete
    eigenvalues, prod_k (lambda - l_k) / (lambda - l_k*). Evaluation at an
    eigenvalue returns exactly 0; evaluation at a mirrored pole raises.
    """
    ls = spectrum.lambdas
    if ls.size and np.min(np.abs(lam - np.conj(ls))) < DEGENERACY_TOL:
        raise NFTError("evaluation at pole of a(lambda)")
    return complex(np.prod((lam - ls) / (lam - np.conj(ls))))


def evolve_spectrum(spectrum: DiscreteSpectrum, z: float) -> DiscreteSpectrum:
    """Propagate the spectrum a distance z: b_k <- b_k exp(4j lambda_k^2 z)."""
    lam = spectrum.lambdas
    return DiscreteSpectrum(lam.copy(), spectrum.bs * np.exp(4j * lam**2 * z))


# ---------------------------------------------------------------------------
# Spectrum file format:
#   line 1: "# nft-spectrum v1 K=<integer>"
#   then K lines "<re_lambda>,<im_lambda>,<re_b>,<im_b>", 17 significant digits.
# ---------------------------------------------------------------------------

_SPECTRUM_HEADER = re.compile(r"^# nft-spectrum v1 K=(\d+)\s*$")


def write_spectrum(spectrum: DiscreteSpectrum, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nft-spectrum v1 K={spectrum.K}\n")
        for lam, b in zip(spectrum.lambdas, spectrum.bs):
            fh.write(
                f"{_fmt(lam.real)},{_fmt(lam.imag)},{_fmt(b.real)},{_fmt(b.imag)}\n"
            )


def read_spectrum(path) -> DiscreteSpectrum:
    with open(path) as fh:
        header = fh.readline()
        m = _SPECTRUM_HEADER.match(header)
        if m is None:
            raise NFTError(f"malformed spectrum file header: {header!r}")
        K = int(m.group(1))
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise NFTError(f"malformed spectrum file line: {line!r}")
            rows.append([float(p) for p in parts])
        if len(rows) != K:
            raise NFTError(f"spectrum file has {len(rows)} entries, header says K={K}")
        lam = np.array([complex(r[0], r[1]) for r in rows], dtype=np.complex128)
        b = np.array([complex(r[2], r[3]) for r in rows], dtype=np.complex128)
        return DiscreteSpectrum(lam, b)
