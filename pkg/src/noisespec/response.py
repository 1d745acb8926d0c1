"""Frequency-domain solution of the memory-kernel master equation.

The reduced dynamics of a qubit coupled to stationary noise, to second order
in the coupling, is a Volterra equation for the Bloch vector,

    dv/dt = L0 v(t)
          + L1 int_0^t [G(t-t') e^{(t-t') L0} L1 + O(t-t') e^{(t-t') L0} L1p] v(t') dt',

with L0/L1 the commutator superoperators of the free and coupling
Hamiltonians and L1p the anticommutator superoperator of the coupling.  A
one-sided Laplace transform turns the convolution into the linear system

    [s I - L0 - L1 K(s)] v(s) = v(0),
    K(s) = G(s I - L0) L1 + O(s I - L0) L1p,

where G(s I - L0) is a matrix function evaluated through the
eigendecomposition of L0.  This module solves that system and extracts rate
responses and long-time limits from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bloch import (
    SuperopEigendecomposition,
    anticommutator_superop,
    commutator_superop,
    matrix_s_function,
    strip_negligible_imag,
)
from .errors import ExtrapolationError, PoleProximityError
from .noise import NoiseSpectra

COND_LIMIT = 1e12


@dataclass(frozen=True)
class SystemSpec:
    """Frozen ingredients of one qubit-plus-noise configuration.

    L0, L1 are commutator superoperators (free evolution, coupling); L1_plus
    is the anticommutator superoperator of the same coupling operator.  eig0
    diagonalizes L0.  v0 is the initial Bloch vector with v0[0] = 1.
    """

    L0: np.ndarray
    L1: np.ndarray
    L1_plus: np.ndarray
    eig0: SuperopEigendecomposition
    noise: NoiseSpectra
    v0: np.ndarray

    @classmethod
    def from_hamiltonians(
        cls, H0, H1, noise: NoiseSpectra, v0, eig0: SuperopEigendecomposition | None = None
    ) -> "SystemSpec":
        L0 = commutator_superop(H0)
        if eig0 is None:
            eig0 = SuperopEigendecomposition.from_superoperator(L0)
        else:
            eig0.verify(L0)
        v0 = np.asarray(v0, dtype=float)
        if v0.shape != (4,) or abs(v0[0] - 1.0) > 1e-12:
            raise ValueError("initial Bloch vector must be length 4 with v0[0] = 1")
        if np.linalg.norm(v0[1:]) > 1.0 + 1e-9:
            raise ValueError("initial Bloch vector lies outside the unit ball")
        return cls(
            L0=L0,
            L1=commutator_superop(H1),
            L1_plus=anticommutator_superop(H1),
            eig0=eig0,
            noise=noise,
            v0=v0,
        )

    @property
    def splitting(self) -> float:
        """|Im| of the rotating eigenvalue pair of L0 (0 for a trivial frame)."""
        return float(np.abs(self.eig0.eigenvalues.imag).max())


def kernel_K(sys: SystemSpec, s: complex) -> np.ndarray:
    """Memory kernel transform K(s) = G(sI - L0) L1 + O(sI - L0) L1p."""
    G = matrix_s_function(sys.noise.gamma, sys.eig0, s)
    K = G @ sys.L1
    O = matrix_s_function(sys.noise.omega, sys.eig0, s)
    return K + O @ sys.L1_plus


def system_matrix(sys: SystemSpec, s: complex) -> np.ndarray:
    """M(s) = s I - L0 - L1 K(s); v(s) solves M(s) v = v(0)."""
    return strip_negligible_imag(
        s * np.eye(4) - sys.L0 - sys.L1 @ kernel_K(sys, s)
    )


def bloch_response(sys: SystemSpec, s: complex) -> np.ndarray:
    """Laplace-domain Bloch vector v(s) at one point s.

    Solves the 4x4 system with a condition-number guard (cond > 1e12 raises
    PoleProximityError: s is sitting on or next to a response pole) and a
    residual check on the returned solution.
    """
    M = system_matrix(sys, s)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PoleProximityError(
            f"system matrix is ill-conditioned at s = {s} (cond = {cond:.3e})",
            s=s,
            cond=cond,
        )
    v = np.linalg.solve(M, sys.v0.astype(M.dtype))
    resid = np.linalg.norm(M @ v - sys.v0)
    if resid > 1e-10 * cond * np.linalg.norm(sys.v0):
        raise PoleProximityError(
            f"solve residual {resid:.3e} too large at s = {s}", s=s, cond=cond
        )
    return v


def rate_response(sys: SystemSpec, s: complex) -> np.ndarray:
    """Transform of dv/dt: s v(s) - v(0), componentwise."""
    return s * bloch_response(sys, s) - sys.v0


def z_rate(sys: SystemSpec, s: complex) -> complex:
    """Half z-rate transform (1/2)[s v3(s) - v3(0)].

    The frequency-side counterpart of the half-rate series
    timesim.transition_rate_trace; directional (leaving-rate) bookkeeping is
    the caller's, as there.
    """
    return 0.5 * rate_response(sys, s)[3]


@dataclass(frozen=True)
class FinalValueResult:
    """Richardson-extrapolated limit of s f(s) with its evidence trail."""

    value: complex
    s_values: tuple
    iterates: tuple          # raw g_k = s_k f(s_k)
    refined: tuple           # second-order Richardson stage
    spread: float
    converged: bool


def final_value(
    target,
    which: int = 3,
    scale: float | None = None,
    ladder: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5),
    rtol: float = 0.05,
    atol: float = 0.0,
    strict: bool = True,
) -> FinalValueResult:
    """Evaluate lim_{s->0+} s f(s) by Richardson extrapolation down a ladder.

    ``target`` is either a SystemSpec (then f(s) = rate_response(sys, s)[which])
    or a callable s -> complex.  ``ladder`` holds decreasing multiples of
    ``scale`` (default: the L0 splitting, or 1); consecutive entries must
    share a common ratio r, and the extrapolation assumes s f(s) = c0 + c1 s
    + c2 s^2 + ...

    The ladder must sit above any saturation scale of f: once s drops below
    the slowest relaxation rate of the system the limit crosses over to the
    true stationary value (0 for a saturating population) rather than the
    quasi-stationary plateau this routine is usually after.

    Non-convergence (Richardson stage spread exceeding rtol*|value| + atol)
    raises ExtrapolationError carrying the iterates unless strict=False.
    """
    if isinstance(target, SystemSpec):
        sys_ = target
        f = lambda s: rate_response(sys_, s)[which]
        if scale is None:
            scale = sys_.splitting or 1.0
    else:
        f = target
        if scale is None:
            scale = 1.0
    lad = np.asarray(ladder, dtype=float)
    if lad.size < 3 or np.any(np.diff(lad) >= 0) or np.any(lad <= 0):
        raise ValueError("ladder must be >= 3 strictly decreasing positive multipliers")
    ratios = lad[:-1] / lad[1:]
    r = ratios[0]
    if not np.allclose(ratios, r, rtol=1e-9):
        raise ValueError("ladder must be geometric (constant ratio)")

    s_vals = lad * scale
    g = np.array([complex(s * f(s)) for s in s_vals])
    # Richardson: kill the O(s) term, then the O(s^2) term
    t1 = (r * g[1:] - g[:-1]) / (r - 1.0)
    t2 = (r * r * t1[1:] - t1[:-1]) / (r * r - 1.0)
    value = t2[-1]
    spread = float(np.abs(np.diff(t2)).max()) if t2.size > 1 else float("nan")
    floor = 100.0 * np.finfo(float).eps * max(np.abs(g).max(), 1e-300)
    converged = spread <= max(rtol * abs(value), atol, floor)
    result = FinalValueResult(
        value=value,
        s_values=tuple(s_vals),
        iterates=tuple(g),
        refined=tuple(t2),
        spread=spread,
        converged=bool(converged),
    )
    if strict and not converged:
        raise ExtrapolationError(
            f"final-value ladder did not settle: spread {spread:.3e} "
            f"vs value {value:.6e}",
            iterates=g,
        )
    return result
