"""Independent scattering reference by piecewise-constant transfer matrices.

The two-component scattering problem

    v' = [[-j lam, q(t)], [-q*(t), j lam]] v

is integrated across one cell per sample, each cell [t_m - dt/2, t_m + dt/2]
holding q constant at q[m]. The cells tile [-T/2, T/2] exactly, the state is
initialized with the free-solution value at the left edge, and the scattering
coefficients are read at the right edge:

    v(-T/2) = (e^{+j lam T/2}, 0),
    a = v1(T/2) e^{+j lam T/2},   b = v2(T/2) e^{-j lam T/2}.

Because the cell matrix A satisfies A^2 = -(lam^2 + |q|^2) I, its exponential
is exp(h A) = cos(kappa h) I + (sin(kappa h)/kappa) A with
kappa = sqrt(lam^2 + |q|^2), branch-free since both factors are even in
kappa. The lambda-derivative of each cell matrix is propagated alongside the
state, giving an exact Newton derivative da/dlam for eigenvalue search.

The scheme is second order in the sample spacing. It is intended as an
oracle run at several times the collocation sample count; forward-only
propagation of b at complex lambda loses accuracy as Im(lam) T grows, so b
values are trusted at high resolution and moderate Im(lam) T only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signal import NFTError, Pulse

_LOG_OVERFLOW = 700.0


@dataclass(frozen=True)
class ScatteringState:
    """Propagated state and scattering coefficients at one lambda."""

    lam: complex
    v: np.ndarray            # final 2-component state at +T/2
    a_hat: complex
    b_hat: complex
    a_lambda_hat: complex    # da/dlam by forward-mode differentiation


def _cell_factors(q: np.ndarray, lam: complex, h: float):
    """Per-cell transfer-matrix entries and their lambda-derivatives."""
    kap2 = lam * lam + np.abs(q) ** 2
    kap = np.sqrt(kap2.astype(np.complex128))
    x = kap * h
    small = np.abs(x) < 1e-4
    x2 = x * x
    c = np.cos(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(small, h * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)), np.sin(x) / kap)
        # g = (h cos(kappa h) - s) / kappa^2, series near kappa = 0
        g = np.where(
            small,
            -(h**3) / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0)),
            (h * c - s) / kap2,
        )
    u11 = c - 1j * lam * s
    u12 = s * q
    u21 = -s * np.conj(q)
    u22 = c + 1j * lam * s
    lg = lam * g
    du11 = -h * lam * s - 1j * lam * lg - 1j * s
    du12 = lg * q
    du21 = -lg * np.conj(q)
    du22 = -h * lam * s + 1j * lam * lg + 1j * s
    return (u11, u12, u21, u22, du11, du12, du21, du22)


def propagate(pulse: Pulse, lam: complex) -> ScatteringState:
    """Propagate the scattering state across the pulse at one lambda."""
    grid = pulse.grid
    if abs(lam.imag) * grid.T / 2.0 > _LOG_OVERFLOW:
        raise NFTError("grid too wide for spectrum: boundary exponentials overflow")
    h = grid.dt
    u11, u12, u21, u22, du11, du12, du21, du22 = (
        arr.tolist() for arr in _cell_factors(pulse.samples, lam, h)
    )
    edge = np.exp(1j * lam * grid.T / 2.0)
    v1, v2 = complex(edge), 0j
    w1 = 1j * (grid.T / 2.0) * complex(edge)  # dv/dlam of the initial value
    w2 = 0j
    for m in range(grid.M):
        a11, a12, a21, a22 = u11[m], u12[m], u21[m], u22[m]
        b11, b12, b21, b22 = du11[m], du12[m], du21[m], du22[m]
        nw1 = a11 * w1 + a12 * w2 + b11 * v1 + b12 * v2
        nw2 = a21 * w1 + a22 * w2 + b21 * v1 + b22 * v2
        nv1 = a11 * v1 + a12 * v2
        nv2 = a21 * v1 + a22 * v2
        v1, v2, w1, w2 = nv1, nv2, nw1, nw2
    a_hat = v1 * edge
    b_hat = v2 / edge
    a_lambda_hat = w1 * edge + v1 * 1j * (grid.T / 2.0) * edge
    return ScatteringState(
        lam=complex(lam),
        v=np.array([v1, v2]),
        a_hat=complex(a_hat),
        b_hat=complex(b_hat),
        a_lambda_hat=complex(a_lambda_hat),
    )


@dataclass(frozen=True)
class NewtonRecord:
    """Per-guess diagnostics from eigenvalue search."""

    guess: complex
    root: complex | None
    converged: bool
    iterations: int
    reason: str


def find_eigenvalues(
    pulse: Pulse,
    initial_guesses,
    tol: float = 1e-12,
    max_iterations: int = 50,
    dedup_tol: float = 1e-8,
    details: bool = False,
):
    """Newton search for roots of a(lambda) in the upper half-plane.

    Non-convergent guesses are flagged in the per-guess records, never fatal.
    Returns the deduplicated list of converged roots, or (roots, records)
    when details is requested.
    """
    roots: list[complex] = []
    records: list[NewtonRecord] = []
    for guess in initial_guesses:
        guess = complex(guess)
        if guess.imag <= 0:
            records.append(NewtonRecord(guess, None, False, 0, "guess not in C+"))
            continue
        lam = guess
        converged = False
        reason = "iteration limit"
        it = 0
        for it in range(1, max_iterations + 1):
            st = propagate(pulse, lam)
            if abs(st.a_lambda_hat) < 1e-14 * max(1.0, abs(st.a_hat)):
                reason = "flat a(lambda), no Newton direction"
                break
            step = st.a_hat / st.a_lambda_hat
            lam = lam - step
            if lam.imag <= 0:
                reason = "iterate left the upper half-plane"
                break
            if abs(step) < tol:
                converged = True
                reason = "converged"
                break
        if converged and all(abs(lam - r) > dedup_tol for r in roots):
            roots.append(lam)
        records.append(NewtonRecord(guess, lam if converged else None,
                                    converged, it, reason))
    if details:
        return roots, records
    return roots


def oracle_b(pulse: Pulse, lam: complex) -> complex:
    """Spectral amplitude b(lambda) read from the propagated state."""
    return propagate(pulse, lam).b_hat
