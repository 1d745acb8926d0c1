"""Bloch-space representation of single-qubit operators and superoperators.

A qubit density matrix is expanded in the Pauli basis,

    rho = (v0*I + v1*sx + v2*sy + v3*sz) / 2,    v_i = Tr(rho sigma_i),

so rho maps to the real 4-vector v = (v0, v1, v2, v3) with v0 = Tr(rho)
(= 1 for physical states).  Linear maps on Hermitian 2x2 matrices become
real 4x4 matrices acting on v; this module builds the two families that a
system-bath commutator expansion produces,

    commutator_superop(H):      rho -> -i[H, rho]
    anticommutator_superop(H):  rho -> {H, rho}

together with an eigendecomposition container used to evaluate matrix
functions f(s*I - L) of a free generator L.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularEvaluationError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

#: Basis (I, sx, sy, sz) in the order of the Bloch components.
PAULI_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITICITY_ATOL = 1e-10


def _pauli_components(H) -> np.ndarray:
    """Real coefficients (h0, h1, h2, h3) of H = h0*I + h.sigma."""
    H = np.asarray(H, dtype=complex)
    if H.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {H.shape}")
    defect = np.abs(H - H.conj().T).max()
    if defect > HERMITICITY_ATOL:
        raise ValueError(f"matrix is not Hermitian: max |H - H^dag| = {defect:.3e}")
    return np.array(
        [np.trace(B @ H).real / 2.0 for B in PAULI_BASIS], dtype=float
    )


def vectorize(rho) -> np.ndarray:
    """Bloch 4-vector of a Hermitian matrix: v_i = Tr(rho sigma_i), v_0 = Tr(rho).

    Rejects non-Hermitian input beyond an absolute tolerance of 1e-10.
    """
    comps = _pauli_components(rho)
    comps[0] *= 2.0  # Tr(rho), not Tr(rho)/2 * Tr(I)
    return comps


def devectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`: rho = (v0*I + v.sigma)/2."""
    v = np.asarray(v, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"expected a Bloch 4-vector, got shape {v.shape}")
    rho = np.zeros((2, 2), dtype=complex)
    for vi, B in zip(v, PAULI_BASIS):
        rho += vi * B
    return rho / 2.0


def commutator_superop(H) -> np.ndarray:
    """Real 4x4 matrix of rho -> -i[H, rho] acting on Bloch vectors.

    With H = h0*I + h.sigma the map is v0 -> 0, v -> 2 h x v: a rotation
    generator about h at rate 2|h|.  Constructed analytically from the
    Pauli components, so the result is exactly real and exactly traceless
    in the v0 row/column.
    """
    _, hx, hy, hz = _pauli_components(H)
    L = np.zeros((4, 4))
    L[1:, 1:] = 2.0 * np.array(
        [[0.0, -hz, hy], [hz, 0.0, -hx], [-hy, hx, 0.0]]
    )
    return L


def anticommutator_superop(H) -> np.ndarray:
    """Real 4x4 matrix of rho -> {H, rho} on Bloch vectors.

    With H = h0*I + h.sigma:  w0 = 2*h0*v0 + 2 h.v,  w = 2*h0*v + 2*v0*h.
    Unlike the commutator this couples v0 to the polarization components.
    """
    h0, hx, hy, hz = _pauli_components(H)
    h = np.array([hx, hy, hz])
    L = 2.0 * h0 * np.eye(4)
    L[0, 1:] += 2.0 * h
    L[1:, 0] += 2.0 * h
    return L


@dataclass(frozen=True)
class SuperopEigendecomposition:
    """Spectral data L = P_inv @ diag(eigenvalues) @ P of a 4x4 generator.

    ``P_inv`` holds the right eigenvectors as columns; ``P`` maps Bloch
    vectors to eigencoordinates.  The container does not require L to be
    diagonalizable in any privileged basis -- only that the reconstruction
    is numerically exact, which :meth:`verify` checks.
    """

    eigenvalues: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.P_inv @ np.diag(self.eigenvalues) @ self.P

    def verify(self, L, rtol: float = 1e-12) -> float:
        """Max-abs reconstruction error against L; raises beyond rtol*scale."""
        L = np.asarray(L, dtype=complex)
        err = np.abs(self.reconstruct() - L).max()
        scale = max(np.abs(L).max(), 1.0)
        if err > rtol * scale:
            raise ValueError(
                f"eigendecomposition does not reconstruct the generator: "
                f"error {err:.3e} > {rtol:.1e} * {scale:.3e}"
            )
        return err

    @classmethod
    def from_superoperator(cls, L, rtol: float = 1e-9) -> "SuperopEigendecomposition":
        """General eigensolver path for an arbitrary generator.

        Verifies the reconstruction before returning; degenerate spectra are
        fine as long as numpy found a complete eigenbasis.
        """
        L = np.asarray(L, dtype=complex)
        vals, vecs = np.linalg.eig(L)
        decomp = cls(eigenvalues=vals, P=np.linalg.inv(vecs), P_inv=vecs)
        decomp.verify(L, rtol=rtol)
        return decomp


def matrix_s_function(
    f: Callable[[complex], complex],
    eig: SuperopEigendecomposition,
    s: complex,
) -> np.ndarray:
    """Evaluate f(s*I - L) through the eigendecomposition of L.

    Applies f to each shifted eigenvalue, f(s - x_i), and rotates back:
    P_inv @ diag{f(s - x_i)} @ P.  A non-finite value of f at any shifted
    point raises SingularEvaluationError naming the offending points.
    """
    shifted = s - eig.eigenvalues
    vals = np.array([f(z) for z in shifted], dtype=complex)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise SingularEvaluationError(
            "matrix function hit a singular point of f at shifted eigenvalue(s) "
            + ", ".join(f"{z}" for z in shifted[bad]),
            points=shifted[bad],
        )
    return strip_negligible_imag(eig.P_inv @ (vals[:, None] * eig.P))


def strip_negligible_imag(M: np.ndarray) -> np.ndarray:
    """Return M.real when the imaginary part is numerically zero, else M.

    Matrix functions of a real generator evaluated at real s are real up to
    roundoff (conjugate eigenpairs carry conjugate weights); dropping the
    dust keeps downstream linear algebra in float64 when possible without
    hiding genuinely complex results.
    """
    if np.iscomplexobj(M) and np.abs(M.imag).max() < 1e-13 * max(1.0, np.abs(M.real).max()):
        return M.real.copy()
    return M
