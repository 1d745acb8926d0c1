"""Noise-spectrum identification from ensemble measurement records.

The forward model maps a noise transform G(s) to measurable responses; this
module inverts those maps on *discretely sampled, truncated* data:

* transform a uniformly sampled trace to the Laplace domain, either on its
  natural FFT grid w_j = 2 pi j / T (where the trapezoid sum IS a DFT) or on
  arbitrary frequencies;
* locate the qubit splitting as the oscillation peak of the transformed
  alternating part Q(t) - 1/2;
* invert the coherent-response or relaxation-rate formulas for the spectrum,
  masking frequencies where the inversion denominator loses support.

Everything here consumes plain sampled data (no model objects), so it runs
identically on simulated and on external measurement records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DetectionError
from .timesim import Trajectory, transition_rate_trace

TRUNCATION_WARN_LEVEL = 0.05


@dataclass
class MeasurementTrace:
    """Uniformly sampled population record Q(t_k) with light validation.

    Requirements: at least 16 samples, uniform spacing to 1e-9 relative, and
    values inside [-margin, 1 + margin] (population readings with room for
    estimator noise; margin defaults to 0.25).
    """

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    margin: float = 0.25

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be matching 1-d arrays")
        if self.times.size < 16:
            raise ValueError(f"need at least 16 samples, got {self.times.size}")
        steps = np.diff(self.times)
        dt = steps[0]
        if dt <= 0 or np.abs(steps - dt).max() > 1e-9 * dt:
            raise ValueError("time grid must be uniform (1e-9 relative tolerance)")
        lo, hi = -self.margin, 1.0 + self.margin
        if self.values.min() < lo or self.values.max() > hi:
            raise ValueError(
                f"values outside [{lo:g}, {hi:g}]: not a population trace "
                f"(range [{self.values.min():g}, {self.values.max():g}])"
            )

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_span(self) -> float:
        return float(self.times[-1] - self.times[0])

    def alternating(self) -> tuple[np.ndarray, np.ndarray]:
        """(times, Q - 1/2): the decaying part whose transform detection uses."""
        return self.times, self.values - 0.5


def natural_grid(trace: MeasurementTrace) -> np.ndarray:
    """FFT-aligned frequencies w_j = 2 pi j / T, j = 1 .. floor((n-1)/2)."""
    n = trace.times.size
    j_max = (n - 1) // 2
    return 2.0 * math.pi * np.arange(1, j_max + 1) / trace.t_span


@dataclass
class DiscreteLaplace:
    """Trapezoid Laplace transform of a trace on a frequency grid.

    values[k] ~ int_0^T f(t) e^{-(damping + i omegas[k]) t} dt.  The
    truncation_residual records |f(T)| (damped) relative to max |f| -- a
    large value means the window ended before the signal died and the
    transform carries an O(residual) tail error.
    """

    omegas: np.ndarray
    values: np.ndarray
    damping: float
    dt: float
    t_span: float
    truncation_residual: float
    meta: dict = field(default_factory=dict)

    @property
    def truncated(self) -> bool:
        return self.truncation_residual > TRUNCATION_WARN_LEVEL

    @property
    def s(self) -> np.ndarray:
        return self.damping + 1j * self.omegas


def discrete_laplace(
    trace: MeasurementTrace,
    omegas=None,
    damping: float = 0.0,
    alternating: bool = False,
    empirical_mean: bool = False,
) -> DiscreteLaplace:
    """Transform a trace; frequencies above Nyquist (pi/dt) are rejected.

    With the default (natural) grid the trapezoid sum is evaluated as one
    rFFT; arbitrary grids fall back to a chunked direct sum.  damping > 0
    multiplies the integrand by e^{-damping t} first, trading truncation
    error for an evaluation point shifted off the imaginary axis.
    alternating=True transforms Q - 1/2 instead of Q (the decaying part a
    saturating population leaves after its constant is split off), which is
    what the truncation_residual is meaningful for.  empirical_mean=True
    subtracts the sample mean instead of the theoretical 1/2 -- for records
    with a miscalibrated offset; only meaningful with alternating=True.
    """
    if damping < 0:
        raise ValueError("damping must be >= 0")
    if empirical_mean and not alternating:
        raise ValueError("empirical_mean only applies to the alternating part")
    t = trace.times - trace.times[0]
    dt = trace.dt
    if alternating:
        f = trace.values - (trace.values.mean() if empirical_mean else 0.5)
    else:
        f = trace.values.copy()
    if damping > 0:
        f = f * np.exp(-damping * t)

    if omegas is None:
        omegas = natural_grid(trace)
    else:
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    nyquist = math.pi / dt
    if np.any(omegas > nyquist * (1 + 1e-12)) or np.any(omegas < 0):
        raise ValueError(
            f"frequencies must lie in [0, pi/dt = {nyquist:g}] "
            f"(got max {omegas.max():g}, min {omegas.min():g})"
        )

    peak = np.abs(f).max()
    residual = float(abs(f[-1]) / peak) if peak > 0 else 0.0

    T = trace.t_span
    n_int = t.size - 1  # trapezoid intervals
    j = omegas * T / (2.0 * math.pi)
    j_round = np.round(j)
    on_grid = (
        np.abs(j - j_round).max() <= 1e-9 * np.maximum(1.0, np.abs(j)).max()
        and j_round.max() <= n_int // 2
    )
    if on_grid:
        spectrum = np.fft.rfft(f[:n_int])
        vals = dt * (spectrum[j_round.astype(int)] + 0.5 * f[-1] - 0.5 * f[0])
    else:
        vals = np.empty(omegas.size, dtype=complex)
        chunk = max(1, int(4e6 // max(t.size, 1)))
        for a in range(0, omegas.size, chunk):
            w = omegas[a : a + chunk]
            kernel = np.exp(-1j * np.multiply.outer(w, t))
            vals[a : a + chunk] = np.trapezoid(kernel * f, t, axis=-1)
    return DiscreteLaplace(
        omegas=omegas,
        values=vals,
        damping=damping,
        dt=dt,
        t_span=T,
        truncation_residual=residual,
        meta={
            "fft_path": bool(on_grid),
            "n_samples": trace.times.size,
            "alternating": alternating,
        },
    )


def laplace_on_real_axis(times, values, s_grid) -> np.ndarray:
    """Trapezoid transform of a sampled function at real s values."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    t = times - times[0]
    out = np.empty(s_grid.size)
    for k, s in enumerate(s_grid):
        out[k] = np.trapezoid(values * np.exp(-s * t), t)
    return out


@dataclass(frozen=True)
class DeltaEstimate:
    """Detected oscillation frequency with its grid context."""

    delta: float
    peak_index: int
    bin_width: float
    offset: float  # sub-bin refinement in units of bin_width


def detect_delta(dl: DiscreteLaplace) -> DeltaEstimate:
    """Locate the qubit splitting as the dominant peak of |Q^AC transform|.

    Parabolic refinement on the log-magnitude of the peak and its neighbors
    gives sub-bin resolution.  Raises DetectionError when the peak sits on a
    grid edge, the spectrum is too flat to call a peak, or the three-point
    stencil is not concave.
    """
    steps = np.diff(dl.omegas)
    if steps.size < 2 or np.abs(steps - steps[0]).max() > 1e-9 * steps[0]:
        raise DetectionError("detection needs a uniform frequency grid with >= 3 bins")
    mag = np.abs(dl.values)
    k = int(np.argmax(mag))
    if k == 0 or k == mag.size - 1:
        raise DetectionError(f"peak at grid edge (bin {k}); widen the frequency window")
    if mag[k] <= 0 or mag[k] < 3.0 * np.median(mag):
        raise DetectionError("no clear oscillation peak (flat transform magnitude)")
    ym, y0, yp = np.log(mag[k - 1 : k + 2])
    denom = ym - 2.0 * y0 + yp
    if denom >= 0:
        raise DetectionError("peak stencil is not concave; refinement undefined")
    offset = 0.5 * (ym - yp) / denom
    if abs(offset) > 1.0:
        raise DetectionError(f"refinement offset {offset:.2f} bins: peak malformed")
    bw = float(steps[0])
    return DeltaEstimate(
        delta=float(dl.omegas[k] + offset * bw),
        peak_index=k,
        bin_width=bw,
        offset=float(offset),
    )


@dataclass
class SpectrumEstimate:
    """Identified noise spectrum on a frequency grid.

    gamma_ft estimates the two-sided even spectrum 2 Re G(i omega); masked
    marks bins where the inversion denominator (reported in
    denominator_abs) is too small to trust.  gamma_complex carries the full
    complex G estimate when the method provides one.
    """

    omegas: np.ndarray
    gamma_ft: np.ndarray
    masked: np.ndarray
    denominator_abs: np.ndarray
    method: str
    gamma_complex: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def _mask(den_abs: np.ndarray, values: np.ndarray, mask_rel: float) -> np.ndarray:
    bad = ~np.isfinite(values) | ~np.isfinite(den_abs)
    scale = np.nanmax(np.where(np.isfinite(den_abs), den_abs, np.nan))
    if not np.isfinite(scale) or scale <= 0:
        return np.ones_like(den_abs, dtype=bool)
    return bad | (den_abs < mask_rel * scale)


def full_Q_values(dl_ac: DiscreteLaplace) -> np.ndarray:
    """Q(s) reconstructed as (transform of Q - 1/2) + 1/(2s).

    The constant half of a saturating population never decays, so its
    truncated transform is badly wrong; transforming the alternating part
    (which does decay) and adding the constant's exact transform keeps the
    truncation error at the e^{-kappa T} level of the decaying signal.
    """
    return dl_ac.values + 0.5 / dl_ac.s


def identify_gamma_complex(
    dl_ac: DiscreteLaplace,
    delta: float,
    omega0: float | None = None,
    mask_rel: float = 1e-3,
) -> SpectrumEstimate:
    """Full complex G(s) from the coherent response at the working point.

    Inverts Q(s) = omega0^2 / (2 s (s^2 + s G(s) + delta^2)):
        G(s) = omega0^2 / (2 s^2 Q) - s - delta^2 / s,
    exact at any s, so a damped transform is inverted at its own s = damping
    + i omega.  gamma_ft is 2 Re of the estimate (equal to the spectrum when
    damping = 0).
    """
    if omega0 is None:
        omega0 = delta
    s = dl_ac.s
    Q = full_Q_values(dl_ac)
    den = 2.0 * s * s * Q
    g = omega0 * omega0 / den - s - delta * delta / s
    den_abs = np.abs(den)
    masked = _mask(den_abs, g, mask_rel)
    return SpectrumEstimate(
        omegas=dl_ac.omegas.copy(),
        gamma_ft=2.0 * g.real,
        masked=masked,
        denominator_abs=den_abs,
        method="coherent-complex",
        gamma_complex=g,
        meta={"delta": delta, "omega0": omega0, "damping": dl_ac.damping},
    )


def identify_gamma_ft(
    dl_ac: DiscreteLaplace,
    delta: float,
    omega0: float | None = None,
    mask_rel: float = 1e-3,
) -> SpectrumEstimate:
    """Real-part-only spectrum formula Gamma_FT = -omega0^2 Re[1/(w^2 Q(iw))].

    Algebraically equal to 2 Re of the complex inversion on the imaginary
    axis; it silently assumes an undamped transform, so damping != 0 is
    rejected rather than misread.
    """
    if dl_ac.damping != 0.0:
        raise ValueError("this estimator assumes an undamped transform (damping = 0)")
    if omega0 is None:
        omega0 = delta
    w = dl_ac.omegas
    Q = full_Q_values(dl_ac)
    den = w * w * Q
    with np.errstate(divide="ignore", invalid="ignore"):
        est = -(omega0 * omega0) * np.real(1.0 / den)
    den_abs = np.abs(den)
    masked = _mask(den_abs, est, mask_rel)
    return SpectrumEstimate(
        omegas=w.copy(),
        gamma_ft=est,
        masked=masked,
        denominator_abs=den_abs,
        method="coherent-ft",
        meta={"delta": delta, "omega0": omega0, "damping": 0.0},
    )


def identify_gamma_ft_ac(
    dl_ac: DiscreteLaplace,
    delta: float,
    omega0: float | None = None,
    variant: str = "ac-exact",
    mask_rel: float = 1e-3,
) -> SpectrumEstimate:
    """Spectrum from the alternating transform alone (no 1/(2s) restoration).

    variant = "ac-exact":  Gamma_FT = -delta^2 Re[1 / (w^2 Qac(iw) - i w/2)],
    an exact rearrangement of the coherent response at s = i w.

    variant = "eq21":  Gamma_FT = -omega0^2 Re[2 Qac / (1/2 + i w Qac)],
    a circulating identification formula kept verbatim for audit.  It is NOT
    an exact rearrangement -- the two variants differ by a frequency-
    dependent factor -- and it is reported as-is, never corrected; comparing
    the two outputs on the same transform is itself a diagnostic.
    """
    if omega0 is None:
        omega0 = delta
    if variant not in ("ac-exact", "eq21"):
        raise ValueError("variant must be 'ac-exact' or 'eq21'")
    w = dl_ac.omegas
    qac = dl_ac.values
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant == "ac-exact":
            den = w * w * qac - 0.5j * w
            est = -(delta * delta) * np.real(1.0 / den)
        else:
            den = 0.5 + 1j * w * qac
            est = -(omega0 * omega0) * np.real(2.0 * qac / den)
    den_abs = np.abs(den)
    masked = _mask(den_abs, est, mask_rel)
    return SpectrumEstimate(
        omegas=w.copy(),
        gamma_ft=est,
        masked=masked,
        denominator_abs=den_abs,
        method=variant,
        meta={"delta": delta, "omega0": omega0, "damping": dl_ac.damping},
    )


# -- relaxation-pair route ---------------------------------------------------


def rate_trace_from_trajectory(
    traj: Trajectory, tol: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Directional leaving rate -sgn(v3(0)) dv3/dt sampled from a trajectory.

    Positive while population flows out of the prepared eigenstate,
    regardless of which eigenstate that was.  The first sample must sit
    within tol of an eigenstate (tol leaves room for estimator noise on
    measured records); the prefactor uses the sign only, so noise on the
    first sample does not rescale the whole trace.
    """
    times, half_rate = transition_rate_trace(traj)
    v30 = traj.states[0, 3]
    if abs(abs(v30) - 1.0) > tol:
        raise ValueError(
            f"rate extraction expects an eigenstate preparation, got v3(0) = {v30:.3f}"
        )
    sign = 1.0 if v30 > 0 else -1.0
    return times, -2.0 * sign * half_rate


@dataclass
class RelaxationInversion:
    """Noise transforms recovered from an up/down rate-transform pair."""

    s: np.ndarray
    gamma_plus: np.ndarray
    omega_minus: np.ndarray
    masked: np.ndarray
    meta: dict = field(default_factory=dict)


def identify_from_relaxation(
    s_grid, gamma_up, gamma_down, mask_threshold: float = 0.05
) -> RelaxationInversion:
    """Invert the working-point rate pair for the modulated noise transforms.

    From gamma_down = (G+ - O-)/(s + G+) and gamma_up = (G+ + O-)/(s + G+):

        G+(s) = s (g_up + g_down) / (2 - (g_up + g_down)),
        O-(s) = s (g_up - g_down) / (2 - (g_up + g_down)).

    The denominator 2 - (g_up + g_down) -> 0 as s -> 0 (saturation: both
    transforms approach 1); bins with |denominator| below mask_threshold are
    flagged rather than trusted.
    """
    s = np.atleast_1d(np.asarray(s_grid))
    gu = np.atleast_1d(np.asarray(gamma_up))
    gd = np.atleast_1d(np.asarray(gamma_down))
    if not (s.shape == gu.shape == gd.shape):
        raise ValueError("s grid and both rate arrays must share a shape")
    den = 2.0 - (gu + gd)
    masked = np.abs(den) < mask_threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        gp = s * (gu + gd) / den
        om = s * (gu - gd) / den
    masked |= ~np.isfinite(gp) | ~np.isfinite(om)
    return RelaxationInversion(
        s=s, gamma_plus=gp, omega_minus=om, masked=masked,
        meta={"mask_threshold": mask_threshold},
    )


# -- golden-rule sweep route -------------------------------------------------


@dataclass
class GoldenRuleSweep:
    """Directional spectrum samples assembled from a bias sweep."""

    omegas: np.ndarray      # signed frequencies +-delta(theta)
    phi: np.ndarray         # directional spectrum estimates there
    thetas: np.ndarray      # bias angle each sample came from
    directions: list        # "down" (omega > 0) or "up" (omega < 0)


def golden_rule_sweep(measurements, ej: float) -> GoldenRuleSweep:
    """Map stationary rates at several bias angles onto the spectrum axis.

    Each measurement dict carries theta and the stationary rates rate_down /
    rate_up observed there.  At fixed tunnel splitting ej the level splitting
    is delta = ej / sin(theta) and the golden-rule relations invert to

        Phi(+delta) = rate_down / sin^2(theta),
        Phi(-delta) = rate_up   / sin^2(theta),

    so sweeping theta traces the spectrum on both sides of zero, sampled
    more densely near |omega| = ej.
    """
    if ej <= 0:
        raise ValueError("ej must be positive")
    oms, phis, ths, dirs = [], [], [], []
    for m in measurements:
        th = float(m["theta"])
        if not (0 < th < math.pi):
            raise ValueError(f"theta = {th:g} outside (0, pi)")
        sin2 = math.sin(th) ** 2
        delta = ej / math.sin(th)
        for key, sign, label in (("rate_down", +1, "down"), ("rate_up", -1, "up")):
            if key not in m or m[key] is None:
                continue
            rate = float(m[key])
            if rate < 0:
                raise ValueError(f"{key} must be >= 0 (got {rate:g})")
            oms.append(sign * delta)
            phis.append(rate / sin2)
            ths.append(th)
            dirs.append(label)
    if not oms:
        raise ValueError("no usable measurements in the sweep")
    order = np.argsort(oms)
    return GoldenRuleSweep(
        omegas=np.asarray(oms)[order],
        phi=np.asarray(phis)[order],
        thetas=np.asarray(ths)[order],
        directions=[dirs[i] for i in order],
    )
