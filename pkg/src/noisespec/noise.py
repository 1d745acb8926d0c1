"""Stationary noise models: correlation functions and their Laplace/Fourier data.

A classical (or weakly quantum) bath enters the reduced qubit dynamics only
through the symmetrized correlation G(tau) (even in tau) and an optional odd
part O(tau) encoding the emission/absorption asymmetry.  Each model provides

  * the time-domain pair  (G(tau), O(tau)),
  * one-sided Laplace transforms  G(s) = int_0^inf e^{-s tau} G(tau) dtau
    (and likewise O(s)),
  * modulated combinations  G_plus(s) = L[G cos(D tau)], G_minus = L[G sin(D tau)],
    which is where a qubit splitting D mixes into the damping kernels.

White noise is represented with G(tau) = gw*delta(tau); its one-sided
transform is gw/2 (the delta sits on the integration boundary), and the time
integrator receives the same half weight through ``delta_weight``.

Units: time in ps, rates/frequencies in rad/ps; ``g2`` has units rad^2/ps^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import exp1, expi

from .errors import SingularEvaluationError

_VALID_KINDS = ("lorentzian", "lorentzian_sum", "white", "ohmic", "tabulated")

# |s - pole| below this (relative to the pole scale) counts as "at the pole"
_POLE_RTOL = 1e-9


@dataclass(frozen=True)
class ModulatedTransforms:
    """Plain and splitting-modulated transforms at one (delta, s) point.

    gamma_plus  = [G(s + i delta) + G(s - i delta)] / 2     = L[G(t) cos(delta t)]
    gamma_minus = [G(s + i delta) - G(s - i delta)] / (2i)  = -L[G(t) sin(delta t)]
    and the same combinations of O.  Note the sign in the minus combination:
    it is chosen so that gamma_minus(0) = Im G(i delta) (and likewise for O),
    which is the orientation the closed-form response formulas below use.
    """

    gamma0: complex
    gamma_plus: complex
    gamma_minus: complex
    omega0: complex
    omega_plus: complex
    omega_minus: complex


@dataclass(frozen=True)
class NoiseSpectra:
    """Narrow frequency-side view of a noise model: two transforms + domain.

    ``gamma`` / ``omega`` map complex s (scalar) to the one-sided transforms;
    they must be valid for Re s > sigma_min (boundary included when finite
    there).  This is all the frequency-domain response machinery needs, so
    synthetic spectra can be supplied directly in tests and diagnostics.
    """

    gamma: Callable[[complex], complex]
    omega: Callable[[complex], complex]
    sigma_min: float = -math.inf
    delta_weight: float = 0.0

    def modulated(self, delta: float, s: complex) -> ModulatedTransforms:
        gp_hi = self.gamma(s + 1j * delta)
        gp_lo = self.gamma(s - 1j * delta)
        op_hi = self.omega(s + 1j * delta)
        op_lo = self.omega(s - 1j * delta)
        return ModulatedTransforms(
            gamma0=self.gamma(s),
            gamma_plus=0.5 * (gp_hi + gp_lo),
            gamma_minus=(gp_hi - gp_lo) / 2j,
            omega0=self.omega(s),
            omega_plus=0.5 * (op_hi + op_lo),
            omega_minus=(op_hi - op_lo) / 2j,
        )

    @classmethod
    def zero(cls) -> "NoiseSpectra":
        """Noise-free spectra (both transforms identically zero)."""
        return cls(gamma=lambda s: 0.0 + 0.0j, omega=lambda s: 0.0 + 0.0j)


@dataclass(frozen=True)
class SpectralAsymmetry:
    """Odd correlation part O(tau) = amp * e^{-|tau|/tau_c} (1 - e^{-|tau|/tau_r}) sgn(tau).

    amp > 0 tilts the directional spectrum toward positive frequencies
    (Im O(i delta) < 0), i.e. emission outpaces absorption and the qubit
    relaxes downward faster than it is excited.  tau_r sets how fast the odd
    part switches on away from tau = 0 (O must vanish at 0).
    """

    amp: float
    tau_c: float
    tau_r: float

    def __post_init__(self):
        if not (self.tau_c > 0 and self.tau_r > 0):
            raise ValueError("asymmetry time constants must be positive")

    def correlation(self, tau):
        tau = np.asarray(tau, dtype=float)
        at = np.abs(tau)
        mag = self.amp * np.exp(-at / self.tau_c) * (1.0 - np.exp(-at / self.tau_r))
        return np.sign(tau) * mag

    def laplace(self, s):
        s = np.asarray(s, dtype=complex)
        rc, rr = 1.0 / self.tau_c, 1.0 / self.tau_r
        _reject_poles(s, (-rc, -(rc + rr)))
        return self.amp * (1.0 / (s + rc) - 1.0 / (s + rc + rr))

    @property
    def sigma_min(self) -> float:
        return -1.0 / self.tau_c

    @property
    def corr_time(self) -> float:
        return max(self.tau_c, self.tau_r)

    def to_dict(self) -> dict:
        return {"amp": self.amp, "tau_c": self.tau_c, "tau_r": self.tau_r}


def _reject_poles(s, poles):
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    for p in poles:
        scale = max(abs(p), 1.0)
        bad = np.abs(s - p) < _POLE_RTOL * scale
        if bad.any():
            raise SingularEvaluationError(
                f"transform evaluated at a pole s = {p}", points=s[bad]
            )


class NoiseModel:
    """One of the supported correlation families plus an optional odd part.

    Construct through the classmethods (``lorentzian``, ``white``, ...) or
    :meth:`from_dict`; the plain constructor validates kind and parameters.
    """

    def __init__(self, kind: str, params: dict, asymmetry: SpectralAsymmetry | None = None):
        if kind not in _VALID_KINDS:
            raise ValueError(f"unknown noise kind {kind!r}; expected one of {_VALID_KINDS}")
        self.kind = kind
        self.params = dict(params)
        self.asymmetry = asymmetry
        self._validate()

    # -- constructors ------------------------------------------------------

    @classmethod
    def lorentzian(cls, g2: float, tau_c: float, asymmetry=None) -> "NoiseModel":
        """Exponential correlation G(tau) = g2 * exp(-|tau|/tau_c)."""
        return cls("lorentzian", {"g2": g2, "tau_c": tau_c}, asymmetry)

    @classmethod
    def lorentzian_sum(cls, components, asymmetry=None) -> "NoiseModel":
        """Sum of exponential components [{'g2': ..., 'tau_c': ...}, ...]."""
        comps = [{"g2": float(c["g2"]), "tau_c": float(c["tau_c"])} for c in components]
        return cls("lorentzian_sum", {"components": comps}, asymmetry)

    @classmethod
    def white(cls, gamma_w: float) -> "NoiseModel":
        """Memoryless noise G(tau) = gamma_w * delta(tau)."""
        return cls("white", {"gamma_w": gamma_w})

    @classmethod
    def ohmic(cls, eta: float, omega_cut: float, asymmetry=None) -> "NoiseModel":
        """Symmetrized spectrum S(w) = eta |w| exp(-|w|/omega_cut).

        Time domain: G(tau) = (eta/pi) (a^2 - tau^2) / (a^2 + tau^2)^2 with
        a = 1/omega_cut; note the algebraic (non-exponential) tail and the
        zero integral G(s -> 0) = 0.
        """
        return cls("ohmic", {"eta": eta, "omega_cut": omega_cut}, asymmetry)

    @classmethod
    def tabulated(cls, tau, gamma, omega=None, asymmetry=None) -> "NoiseModel":
        """Sampled correlation on tau >= 0 with trapezoid-quadrature transforms."""
        return cls(
            "tabulated",
            {
                "tau": np.asarray(tau, dtype=float),
                "gamma": np.asarray(gamma, dtype=float),
                "omega": None if omega is None else np.asarray(omega, dtype=float),
            },
            asymmetry,
        )

    # -- validation --------------------------------------------------------

    def _validate(self):
        p = self.params
        if self.kind == "lorentzian":
            if not (p["g2"] > 0 and p["tau_c"] > 0):
                raise ValueError("lorentzian requires g2 > 0 and tau_c > 0")
        elif self.kind == "lorentzian_sum":
            comps = p["components"]
            if not comps:
                raise ValueError("lorentzian_sum requires at least one component")
            for c in comps:
                if not (c["g2"] > 0 and c["tau_c"] > 0):
                    raise ValueError("each component requires g2 > 0 and tau_c > 0")
        elif self.kind == "white":
            if not p["gamma_w"] > 0:
                raise ValueError("white requires gamma_w > 0")
            if self.asymmetry is not None:
                raise ValueError("white noise does not take an odd part")
        elif self.kind == "ohmic":
            if not (p["eta"] > 0 and p["omega_cut"] > 0):
                raise ValueError("ohmic requires eta > 0 and omega_cut > 0")
        elif self.kind == "tabulated":
            tau, gam = p["tau"], p["gamma"]
            if tau.ndim != 1 or tau.shape != gam.shape or tau.size < 4:
                raise ValueError("tabulated requires matching 1-d tau/gamma with >= 4 samples")
            if tau[0] != 0.0 or np.any(np.diff(tau) <= 0):
                raise ValueError("tabulated tau grid must start at 0 and increase strictly")
            if not gam[0] > 0:
                raise ValueError("tabulated requires gamma(0) > 0")
            if np.abs(gam).max() > gam[0] * (1 + 1e-12):
                raise ValueError("correlation inequality violated: |G(tau)| exceeds G(0)")
            om = p["omega"]
            if om is not None:
                if om.shape != tau.shape:
                    raise ValueError("tabulated omega must match the tau grid")
                if om[0] != 0.0:
                    raise ValueError("odd part must vanish at tau = 0")

    # -- time domain -------------------------------------------------------

    def correlation_at(self, tau):
        """Smooth correlation pair (G(tau), O(tau)) with even/odd extension.

        The white-noise delta component is *not* included here; it is carried
        separately by :attr:`delta_weight`.
        """
        tau = np.asarray(tau, dtype=float)
        at = np.abs(tau)
        p = self.params
        if self.kind == "lorentzian":
            g = p["g2"] * np.exp(-at / p["tau_c"])
        elif self.kind == "lorentzian_sum":
            g = sum(c["g2"] * np.exp(-at / c["tau_c"]) for c in p["components"])
        elif self.kind == "white":
            g = np.zeros_like(at)
        elif self.kind == "ohmic":
            a = 1.0 / p["omega_cut"]
            g = (p["eta"] / np.pi) * (a * a - at * at) / (a * a + at * at) ** 2
        elif self.kind == "tabulated":
            if np.any(at > p["tau"][-1] * (1 + 1e-12)):
                raise ValueError("tau beyond the tabulated grid")
            g = np.interp(at, p["tau"], p["gamma"])
        o = np.zeros_like(g)
        if self.asymmetry is not None:
            o = self.asymmetry.correlation(tau)
        elif self.kind == "tabulated" and p["omega"] is not None:
            o = np.sign(tau) * np.interp(at, p["tau"], p["omega"])
        return g, o

    @property
    def delta_weight(self) -> float:
        """Coefficient of the instantaneous kernel term (gw/2 for white noise)."""
        return 0.5 * self.params["gamma_w"] if self.kind == "white" else 0.0

    @property
    def corr_time(self) -> float:
        """Slowest decay scale of the smooth correlation (0 for pure white)."""
        p = self.params
        if self.kind == "lorentzian":
            t = p["tau_c"]
        elif self.kind == "lorentzian_sum":
            t = max(c["tau_c"] for c in p["components"])
        elif self.kind == "white":
            t = 0.0
        elif self.kind == "ohmic":
            t = 1.0 / p["omega_cut"]
        elif self.kind == "tabulated":
            tau, gam = p["tau"], np.abs(p["gamma"])
            below = np.nonzero(gam <= gam[0] / math.e)[0]
            t = tau[below[0]] if below.size else tau[-1]
        if self.asymmetry is not None:
            t = max(t, self.asymmetry.corr_time)
        return t

    def kernel_cut_time(self, rel: float = 1e-8) -> float:
        """Memory horizon: tau beyond which |G| + |O| stays below rel * scale.

        scale = G(0) + max|O|.  Scanned numerically on a fine grid out to a
        generous multiple of corr_time (or the grid end for tabulated data);
        raises if the kernel has not decayed by then.
        """
        if self.kind == "white":
            return 0.0
        p = self.params
        horizon = p["tau"][-1] if self.kind == "tabulated" else 0.0
        if self.kind != "tabulated":
            # exponential families need ~ln(1/rel) correlation times; the
            # algebraic ohmic tail needs ~sqrt(1/rel) cutoff times
            mult = 4.0 * math.log(1.0 / rel)
            if self.kind == "ohmic":
                mult = 2.0 / math.sqrt(rel)
            horizon = mult * max(self.corr_time, 1e-300)
        taus = np.linspace(0.0, horizon, 20001)
        g, o = self.correlation_at(taus)
        total = np.abs(g) + np.abs(o)
        scale = total[0] + np.abs(o).max()
        keep = np.nonzero(total >= rel * scale)[0]
        if keep.size == 0:
            return 0.0
        if keep[-1] == taus.size - 1 and self.kind != "tabulated":
            raise ValueError(
                f"correlation has not decayed below {rel:g} * scale within the scan horizon"
            )
        return float(taus[min(keep[-1] + 1, taus.size - 1)])

    # -- frequency domain --------------------------------------------------

    @property
    def sigma_min(self) -> float:
        """Abscissa of convergence: transforms valid for Re s > sigma_min."""
        p = self.params
        if self.kind == "lorentzian":
            sm = -1.0 / p["tau_c"]
        elif self.kind == "lorentzian_sum":
            sm = max(-1.0 / c["tau_c"] for c in p["components"])
        elif self.kind == "white":
            sm = -math.inf
        elif self.kind == "ohmic":
            sm = 0.0  # branch point chain on Re s = 0; boundary handled as a limit
        elif self.kind == "tabulated":
            sm = -math.inf  # finite-support quadrature converges everywhere
        if self.asymmetry is not None:
            sm = max(sm, self.asymmetry.sigma_min)
        return sm

    def _gamma_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        p = self.params
        if self.kind == "lorentzian":
            rc = 1.0 / p["tau_c"]
            _reject_poles(s, (-rc,))
            return p["g2"] / (s + rc)
        if self.kind == "lorentzian_sum":
            _reject_poles(s, tuple(-1.0 / c["tau_c"] for c in p["components"]))
            return sum(c["g2"] / (s + 1.0 / c["tau_c"]) for c in p["components"])
        if self.kind == "white":
            return np.full_like(s, 0.5 * p["gamma_w"])
        if self.kind == "ohmic":
            return _ohmic_laplace(s, p["eta"], 1.0 / p["omega_cut"])
        # tabulated: trapezoid quadrature of the sampled smooth part
        tau, gam = p["tau"], p["gamma"]
        flat = s.reshape(-1)
        out = np.array(
            [np.trapezoid(gam * np.exp(-z * tau), tau) for z in flat], dtype=complex
        )
        return out.reshape(s.shape)

    def _omega_laplace(self, s):
        s = np.asarray(s, dtype=complex)
        if self.asymmetry is not None:
            return self.asymmetry.laplace(s)
        p = self.params
        if self.kind == "tabulated" and p["omega"] is not None:
            tau, om = p["tau"], p["omega"]
            flat = s.reshape(-1)
            out = np.array(
                [np.trapezoid(om * np.exp(-z * tau), tau) for z in flat], dtype=complex
            )
            return out.reshape(s.shape)
        return np.zeros_like(s)

    def laplace_at(self, s):
        """One-sided transforms (G(s), O(s)); s scalar or array, complex ok.

        Raises SingularEvaluationError at poles and for Re s below the
        abscissa of convergence (boundary allowed where the limit exists).
        """
        s_arr = np.asarray(s, dtype=complex)
        sm = self.sigma_min
        if np.isfinite(sm) and np.any(s_arr.real < sm - 1e-12 * max(1.0, abs(sm))):
            raise SingularEvaluationError(
                f"transform not defined for Re s < {sm:g}",
                points=s_arr[s_arr.real < sm],
            )
        g = self._gamma_laplace(s_arr)
        o = self._omega_laplace(s_arr)
        if np.isscalar(s) or np.asarray(s).ndim == 0:
            return complex(g), complex(o)
        return g, o

    def quadrature_tail_bound(self, s) -> float:
        """For tabulated kinds: crude bound on the transform mass beyond the grid.

        Assumes the integrand keeps its end-of-grid magnitude decay; returns
        |G(tau_end)| * |e^{-s tau_end}| / max(Re s, 1/tau_end) as an order-of-
        magnitude estimate (0 for parametric kinds, which are exact).
        """
        if self.kind != "tabulated":
            return 0.0
        tau_end = self.params["tau"][-1]
        g_end = abs(self.params["gamma"][-1])
        if self.params["omega"] is not None:
            g_end += abs(self.params["omega"][-1])
        s = complex(s)
        rate = max(s.real, 1.0 / tau_end)
        return g_end * abs(np.exp(-s * tau_end)) / rate

    def modulated_at(self, delta: float, s):
        """Splitting-modulated transforms at (delta, s); see ModulatedTransforms."""
        return self.spectra().modulated(delta, complex(s))

    def gamma_ft_at(self, omega):
        """Two-sided Fourier spectrum of the even part: 2 Re G(i omega)."""
        omega = np.asarray(omega, dtype=float)
        g, _ = self.laplace_at(1j * omega + 0j)
        return 2.0 * np.real(g)

    def omega_ft_at(self, omega):
        """Imaginary coefficient of the odd part's two-sided spectrum: 2 Im O(i omega).

        The full odd spectrum is 2i Im O(i omega) (purely imaginary for a real
        odd correlation); this returns its real coefficient, which is odd in
        omega and zero for models without an asymmetry.
        """
        omega = np.asarray(omega, dtype=float)
        _, o = self.laplace_at(1j * omega + 0j)
        return 2.0 * np.imag(o)

    def phi_ft_at(self, omega):
        """Directional spectrum Re G(i omega) - Im O(i omega).

        Evaluated at +|splitting| it gives the downward (emission) golden-rule
        coefficient, at -|splitting| the upward one; with no odd part the two
        coincide with half the symmetric spectrum, Re G(i omega).
        """
        omega = np.asarray(omega, dtype=float)
        g, o = self.laplace_at(1j * omega + 0j)
        return np.real(g) - np.imag(o)

    def spectra(self) -> NoiseSpectra:
        """Frequency-side adapter consumed by the response machinery."""

        def gamma(z: complex) -> complex:
            self._check_domain(z)
            return complex(np.asarray(self._gamma_laplace(z)))

        def omega(z: complex) -> complex:
            return complex(np.asarray(self._omega_laplace(z)))

        return NoiseSpectra(
            gamma=gamma,
            omega=omega,
            sigma_min=self.sigma_min,
            delta_weight=self.delta_weight,
        )

    def _check_domain(self, z):
        sm = self.sigma_min
        if np.isfinite(sm) and np.real(z) < sm - 1e-12 * max(1.0, abs(sm)):
            raise SingularEvaluationError(
                f"transform not defined for Re s < {sm:g}", points=[z]
            )

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        p = self.params
        if self.kind == "tabulated":
            body = {
                "tau": p["tau"].tolist(),
                "gamma": p["gamma"].tolist(),
                "omega": None if p["omega"] is None else p["omega"].tolist(),
            }
        else:
            body = dict(p)
        out = {"kind": self.kind, **body}
        if self.asymmetry is not None:
            out["asymmetry"] = self.asymmetry.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind is None:
            raise ValueError("noise model dict requires a 'kind' field")
        asym = d.pop("asymmetry", None)
        asymmetry = SpectralAsymmetry(**asym) if asym else None
        if kind == "lorentzian":
            return cls.lorentzian(d["g2"], d["tau_c"], asymmetry)
        if kind == "lorentzian_sum":
            return cls.lorentzian_sum(d["components"], asymmetry)
        if kind == "white":
            return cls.white(d["gamma_w"])
        if kind == "ohmic":
            return cls.ohmic(d["eta"], d["omega_cut"], asymmetry)
        if kind == "tabulated":
            return cls.tabulated(d["tau"], d["gamma"], d.get("omega"), asymmetry)
        raise ValueError(f"unknown noise kind {kind!r}")


def _scaled_e1(z):
    """e^z E1(z), stable for large |z| (asymptotic tail instead of inf * 0)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 30.0
    if small.any():
        zs = z[small]
        out[small] = np.exp(zs) * exp1(zs)
    big = ~small
    if big.any():
        zb = z[big]
        acc = np.ones_like(zb)
        term = np.ones_like(zb)
        for k in range(1, 12):
            term *= -k / zb
            acc += term
        out[big] = acc / zb
    return out


def _scaled_ei(x):
    """e^{-x} Ei(x) for x > 0, stable for large x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 30.0
    if small.any():
        out[small] = np.exp(-x[small]) * expi(x[small])
    big = ~small
    if big.any():
        xb = x[big]
        acc = np.ones_like(xb)
        term = np.ones_like(xb)
        for k in range(1, 12):
            term *= k / xb
            acc += term
        out[big] = acc / xb
    return out


def _ohmic_laplace(s, eta, a):
    """Exact transform of (eta/pi)(a^2 - t^2)/(a^2 + t^2)^2 via exponential integrals.

    For Re s > 0:  G(s) = (eta s / 2 pi) [e^{ias} E1(ias) + e^{-ias} E1(-ias)].
    On the axis s = i w one E1 argument lands on the branch cut; the physical
    Re s -> 0+ limit is E1(-x + i0) = -Ei(x) - i pi (x > 0), which reproduces
    2 Re G(iw) = eta |w| e^{-a |w|} exactly.
    """
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    interior = s.real > 1e-300
    if interior.any():
        z = 1j * a * s[interior]
        out[interior] = (eta * s[interior] / (2 * np.pi)) * (
            _scaled_e1(z) + _scaled_e1(-z)
        )
    axis = ~interior
    if axis.any():
        sa = s[axis]
        if np.any(sa.real < -1e-300):
            raise SingularEvaluationError(
                "ohmic transform not defined for Re s < 0", points=sa[sa.real < 0]
            )
        res = np.zeros_like(sa)
        w = sa.imag
        nz = w != 0.0
        x = a * np.abs(w[nz])
        # E1 across the cut (from above for w > 0, below for w < 0)
        cut = -_scaled_ei(x) - 1j * np.pi * np.sign(w[nz]) * np.exp(-x)
        plain = _scaled_e1(x)
        res[nz] = (eta * 1j * w[nz] / (2 * np.pi)) * (cut + plain)
        # s = 0 exactly: s*log(s) -> 0, transform vanishes (zero spectral weight at DC)
        out[axis] = res
    return out
