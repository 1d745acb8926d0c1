"""Charge-qubit frames, parameters, and closed-form responses.

The two-level Hamiltonian is H = -(E_el/2) sigma_z - (E_J/2) sigma_x in the
charge basis, rotated here into the standard form used throughout:

    H0 = (Delta/2) sigma_theta,   sigma_theta = sin(theta) sigma_x + cos(theta) sigma_z,
    Delta = hypot(E_J, E_el),     theta = atan2(E_J, E_el),

with the bias noise coupling through sigma_z/2 (charge frame) or, after
diagonalizing H0, through sigma_theta'/2 with a sin(theta) transverse part
(eigen frame).  theta = pi/2 is the optimal working point E_el = 0.

Angular-frequency units (rad/ps) are used for all energies; helpers convert
to and from ordinary GHz frequencies at the boundary.

Sign conventions (fixed package-wide, matching the modulated transforms in
``noise``): the eigen-frame excited state sits at v3 = -1, so "down" is the
process leaving v3 = -1, and an emission-dominant bath (Im O(i Delta) < 0)
relaxes the qubit toward v3 = +1 with gamma_down > gamma_up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bloch import SIGMA_X, SIGMA_Z, SuperopEigendecomposition
from .noise import NoiseSpectra
from .response import SystemSpec, bloch_response

GHZ_TO_RAD_PER_PS = 2.0 * math.pi * 1e-3

_OPTIMAL_TOL = 1e-9


def ghz_to_angular(nu_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/ps."""
    return nu_ghz * GHZ_TO_RAD_PER_PS


def angular_to_ghz(omega: float) -> float:
    return omega / GHZ_TO_RAD_PER_PS


@dataclass(frozen=True)
class ChargeQubitParams:
    """Two-level parameters in rad/ps: tunnel splitting ej, bias asymmetry e_el."""

    ej: float
    e_el: float

    def __post_init__(self):
        if not self.ej > 0:
            raise ValueError(
                "ej must be > 0 (theta = atan2(ej, e_el) stays inside (0, pi))"
            )

    @property
    def delta(self) -> float:
        """Level splitting hypot(ej, e_el)."""
        return math.hypot(self.ej, self.e_el)

    @property
    def theta(self) -> float:
        """Mixing angle atan2(ej, e_el), in (0, pi)."""
        return math.atan2(self.ej, self.e_el)

    @property
    def omega0(self) -> float:
        """Oscillation frequency entering the spectroscopy formulas (= ej at theta = pi/2)."""
        return self.ej

    @property
    def at_optimal_point(self) -> bool:
        return abs(self.theta - 0.5 * math.pi) <= _OPTIMAL_TOL

    @classmethod
    def from_gate(cls, ej: float, ec: float, ng: float) -> "ChargeQubitParams":
        """Charge-qubit bias from gate charge: e_el = ec (1 - 2 ng)."""
        return cls(ej=ej, e_el=ec * (1.0 - 2.0 * ng))

    @classmethod
    def from_ghz(cls, ej_ghz: float, e_el_ghz: float = 0.0) -> "ChargeQubitParams":
        return cls(ej=ghz_to_angular(ej_ghz), e_el=ghz_to_angular(e_el_ghz))


class RatePair(NamedTuple):
    """Transition-rate pair; `down` leaves the excited (v3 = -1) eigenstate."""

    down: complex
    up: complex


def rotation_eigendecomposition(delta: float, theta: float) -> SuperopEigendecomposition:
    """Analytic spectral data of L0 = commutator_superop((delta/2) sigma_theta).

    Right eigenvectors (columns of P_inv): the trace direction e0 and the
    rotation axis n = (sin t, 0, cos t) with eigenvalue 0, and the circular
    pair u+/- = (cos t, -/+ i, -sin t) with eigenvalues +/- i delta.  The
    double zero eigenvalue is exact, not a numerical coincidence, so the
    explicit inverse below is preferred over a general eigensolver.
    """
    si, co = math.sin(theta), math.cos(theta)
    P_inv = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, si, co, co],
            [0.0, 0.0, -1.0j, 1.0j],
            [0.0, co, -si, -si],
        ],
        dtype=complex,
    )
    P = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, si, 0.0, co],
            [0.0, 0.5 * co, 0.5j, -0.5 * si],
            [0.0, 0.5 * co, -0.5j, -0.5 * si],
        ],
        dtype=complex,
    )
    eigs = np.array([0.0, 0.0, 1j * delta, -1j * delta], dtype=complex)
    return SuperopEigendecomposition(eigenvalues=eigs, P=P, P_inv=P_inv)


def sigma_theta(theta: float) -> np.ndarray:
    return math.sin(theta) * SIGMA_X + math.cos(theta) * SIGMA_Z


def charge_frame(params: ChargeQubitParams, spectra: NoiseSpectra, v0=None) -> SystemSpec:
    """Laboratory (charge-basis) frame: H0 = (Delta/2) sigma_theta, coupling sigma_z/2.

    Default initial state is the zero-charge state v0 = (1, 0, 0, 1), the
    preparation whose measured population Q(t) = (1 - v3(t))/2 oscillates at
    the splitting.
    """
    d, th = params.delta, params.theta
    if v0 is None:
        v0 = np.array([1.0, 0.0, 0.0, 1.0])
    return SystemSpec.from_hamiltonians(
        H0=0.5 * d * sigma_theta(th),
        H1=0.5 * SIGMA_Z,
        noise=spectra,
        v0=v0,
        eig0=rotation_eigendecomposition(d, th),
    )


def eigen_frame(
    params: ChargeQubitParams, spectra: NoiseSpectra, initial: str = "excited"
) -> SystemSpec:
    """Energy eigenbasis: H0 = (Delta/2) sigma_z, coupling sigma_theta/2.

    initial = "excited" starts at v3 = -1 (relaxation, the "down" process);
    "ground" starts at v3 = +1 (excitation, "up").
    """
    if initial not in ("excited", "ground"):
        raise ValueError("initial must be 'excited' or 'ground'")
    v3 = -1.0 if initial == "excited" else 1.0
    d = params.delta
    return SystemSpec.from_hamiltonians(
        H0=0.5 * d * SIGMA_Z,
        H1=0.5 * sigma_theta(params.theta),
        noise=spectra,
        v0=np.array([1.0, 0.0, 0.0, v3]),
        eig0=rotation_eigendecomposition(d, 0.0),
    )


# -- coherent (charge-frame) population response ----------------------------


def coherent_Q(params: ChargeQubitParams, spectra: NoiseSpectra, s: complex) -> complex:
    """Transform of the measured population Q(t) = (1 - v3(t))/2, generic path.

    Solves the full 4x4 system in the charge frame from v0 = (1, 0, 0, 1);
    valid at any bias angle.
    """
    v = bloch_response(charge_frame(params, spectra), s)
    return (1.0 / s - v[3]) / 2.0


def coherent_Q_closed_form(
    params: ChargeQubitParams, spectra: NoiseSpectra, s: complex
) -> complex:
    """Optimal-point closed form Q(s) = Delta^2 / (2 s (s^2 + s G(s) + Delta^2)).

    Requires theta = pi/2 (the transverse-coupling working point); use
    coherent_Q_general_bias away from it.
    """
    if not params.at_optimal_point:
        raise ValueError("closed form requires the optimal point theta = pi/2")
    d = params.delta
    g = spectra.gamma(complex(s))
    return d * d / (2.0 * s * (s * s + s * g + d * d))


def coherent_Q_general_bias(
    params: ChargeQubitParams, spectra: NoiseSpectra, s: complex
) -> complex:
    """Closed-form Q(s) at arbitrary bias angle.

    Rational in the plain and splitting-modulated transforms; reduces to the
    optimal-point form as theta -> pi/2 (the cot^2 and cos terms die) and to
    zero transverse response as theta -> pi.
    """
    d, th = params.delta, params.theta
    s = complex(s)
    mt = spectra.modulated(d, s)
    g0, gp, gm = mt.gamma0, mt.gamma_plus, mt.gamma_minus
    o0, op, om = mt.omega0, mt.omega_plus, mt.omega_minus
    n0 = (s + gp) * (op - o0) + (d + gm) * om
    n1 = d * (s + gp)
    d0 = s * ((s + gp) ** 2 + (d + gm) ** 2)
    d1 = (s + gp) * (s * s + s * g0 + d * d)
    cot2 = (math.cos(th) / math.sin(th)) ** 2
    return (d / (2.0 * s)) * (n0 * math.cos(th) + n1) / (d0 * cot2 + d1)


# -- eigen-frame transition rates -------------------------------------------


def relaxation_rate(
    params: ChargeQubitParams, spectra: NoiseSpectra, s: complex, direction: str = "down"
) -> complex:
    """Transform of the leaving rate of an eigenstate, generic path.

    gamma(s) = -v3(0) [s v3(s) - v3(0)], the transform of -v3(0) dv3/dt:
    positive for decay out of either initial state.  Valid at any bias angle.
    """
    if direction not in ("down", "up"):
        raise ValueError("direction must be 'down' or 'up'")
    sys = eigen_frame(params, spectra, "excited" if direction == "down" else "ground")
    v = bloch_response(sys, s)
    v30 = sys.v0[3]
    return -v30 * (s * v[3] - v30)


def relaxation_rate_closed_form(
    params: ChargeQubitParams, spectra: NoiseSpectra, s: complex, direction: str = "down"
) -> complex:
    """Optimal-point rate transforms (G+ -/+ O-)/(s + G+); theta = pi/2 only."""
    if not params.at_optimal_point:
        raise ValueError("closed form requires the optimal point theta = pi/2")
    if direction not in ("down", "up"):
        raise ValueError("direction must be 'down' or 'up'")
    mt = spectra.modulated(params.delta, complex(s))
    sign = -1.0 if direction == "down" else 1.0
    return (mt.gamma_plus + sign * mt.omega_minus) / (s + mt.gamma_plus)


def relaxation_rates_lowest_order(
    params: ChargeQubitParams, spectra: NoiseSpectra, s: complex
) -> RatePair:
    """Leading-order rate transforms sin^2(theta) (G+ -/+ O-)(s) / s.

    The short-memory / weak-coupling reading of the full response: divide by
    a further s to see these are constant rates in time.
    """
    mt = spectra.modulated(params.delta, complex(s))
    pre = math.sin(params.theta) ** 2 / s
    return RatePair(
        down=pre * (mt.gamma_plus - mt.omega_minus),
        up=pre * (mt.gamma_plus + mt.omega_minus),
    )


def golden_rule_rates(params: ChargeQubitParams, spectra: NoiseSpectra) -> RatePair:
    """Stationary-window rates sin^2(theta) [G+(0) -/+ O-(0)].

    G+(0) = Re G(i Delta) and O-(0) = Im O(i Delta): the noise spectrum
    sampled at the qubit splitting, weighted by the transverse coupling
    fraction.  These are the plateaus the full model shows for measurement
    windows between the bath memory and the inverse stationary rate.
    """
    mt = spectra.modulated(params.delta, 0.0)
    pre = math.sin(params.theta) ** 2
    return RatePair(
        down=pre * (mt.gamma_plus - mt.omega_minus).real,
        up=pre * (mt.gamma_plus + mt.omega_minus).real,
    )
