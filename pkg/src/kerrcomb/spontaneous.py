"""Below-threshold spontaneous four-wave mixing from a flat pumped state.

With the pump below the oscillation threshold the sidemodes stay empty on
average, yet vacuum fluctuations are parametrically scattered into
symmetric pairs (+l, -l).  All quantities here follow in closed form from
the flat intracavity amplitude A0: the output photon-flux spectral
density per sidemode, its lineshape, the spectral envelope across modes,
integrated photon fluxes in the weak/strong/very-weak pumping regimes,
the total emitted power, the pair correlation spectrum, and the photon
pair-number statistics of the resulting two-mode squeezed vacuum.

Spectra are dimensionless and sampled on an omega/kappa grid; conversion
to SI output power is left to the callers (P = hbar * omega_L * R).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar
from scipy.integrate import quad

from .steady_state import FlatStateBranches
from .units import LossBudget, ResonatorConfig

#: Default spectral window (units of kappa) and sampling.
OMEGA_WINDOW = 20.0
OMEGA_POINTS = 2048


class NearThresholdError(FloatingPointError):
    """Spectrum diverges: linearized fluctuation theory breaks down in the
    regime of large quantum fluctuations just below threshold."""


class RegimeBoundaryError(ValueError):
    """Requested flux formula is evaluated on its regime boundary, where
    the closed form has an unphysical divergence."""


class LineShapeKind(enum.Enum):
    SINGLE_PEAKED = "single_peaked"
    DOUBLE_PEAKED = "double_peaked"


@dataclass(frozen=True)
class SidebandShift:
    """Effective frequency offset xi_l = sigma - zeta2 l^2/2 + 2 g0 |A0|^2."""

    l: int
    xi_l: float


@dataclass(frozen=True)
class LineShape:
    kind: LineShapeKind
    peak_frequencies: tuple[float, ...]      # rad/s, {0} or {-w_m, +w_m}
    peak_value: float                        # dimensionless spectral density


@dataclass(frozen=True)
class SpectrumSeries:
    """Samples of a spectral density over a dimensionless abscissa."""

    x: np.ndarray
    values: np.ndarray
    x_label: str = "omega/kappa"


def _pump_amplitude(flat: FlatStateBranches, branch: str = "lower") -> complex:
    if branch not in ("lower", "middle", "upper"):
        raise ValueError(f"unknown flat branch {branch!r}")
    return getattr(flat, branch)


def kerr_shift(flat: FlatStateBranches, branch: str = "lower") -> float:
    """Cross-phase gain g = g0 |A0|^2 (rad/s)."""
    A0 = _pump_amplitude(flat, branch)
    return flat.params.g0 * abs(A0) ** 2


def sideband_shift(l: int, flat: FlatStateBranches, branch: str = "lower") -> SidebandShift:
    p = flat.params
    xi = p.sigma - 0.5 * p.zeta2 * l**2 + 2.0 * kerr_shift(flat, branch)
    return SidebandShift(l=l, xi_l=xi)


def _check_below_threshold(flat: FlatStateBranches, l: int, branch: str) -> None:
    p = flat.params
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l
    margin = p.kappa**2 - g**2 + xi**2
    if g >= p.kappa and margin <= 1e-12 * p.kappa**2:
        raise NearThresholdError(
            f"mode l={l}: g = g0|A0|^2 reaches kappa with xi_l = 0; the "
            "linearized spectrum diverges at threshold")


def default_omega_grid(l: int, flat: FlatStateBranches,
                       branch: str = "lower") -> np.ndarray:
    """Symmetric omega/kappa grid, widened to cover double-peaked maxima."""
    window = OMEGA_WINDOW
    shape = classify_lineshape(l, flat, branch)
    if shape.kind is LineShapeKind.DOUBLE_PEAKED:
        w_m = shape.peak_frequencies[-1] / flat.params.kappa
        window = max(window, w_m + 10.0)
    return np.linspace(-window, window, OMEGA_POINTS)


def spontaneous_spectrum(l: int, flat: FlatStateBranches,
                         omega_grid: np.ndarray | None = None,
                         branch: str = "lower") -> SpectrumSeries:
    """Output photon-flux spectral density of sidemode l (dimensionless).

    S_l(omega) = 4 rho kappa^2 g^2 /
                 ([kappa^2 - g^2 + xi_l^2 - omega^2]^2 + 4 kappa^2 omega^2)
    """
    _check_below_threshold(flat, l, branch)
    p = flat.params
    if omega_grid is None:
        omega_grid = default_omega_grid(l, flat, branch)
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l
    w = omega_grid * p.kappa
    denom = (p.kappa**2 - g**2 + xi**2 - w**2) ** 2 + 4.0 * p.kappa**2 * w**2
    values = 4.0 * p.rho * p.kappa**2 * g**2 / denom
    return SpectrumSeries(np.asarray(omega_grid, dtype=float), values)


def classify_lineshape(l: int, flat: FlatStateBranches,
                       branch: str = "lower") -> LineShape:
    """Single- vs double-peaked spectrum of sidemode l.

    The spectrum is single-peaked (maximum at omega = 0) iff
    xi_l^2 <= kappa^2 + g^2; otherwise the peaks sit at
    omega_m = +/- sqrt(xi_l^2 - kappa^2 - g^2).
    """
    p = flat.params
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l
    excess = xi**2 - p.kappa**2 - g**2
    if excess <= 0.0:
        peak = 4.0 * p.rho * p.kappa**2 * g**2 / (p.kappa**2 - g**2 + xi**2) ** 2
        return LineShape(LineShapeKind.SINGLE_PEAKED, (0.0,), peak)
    w_m = math.sqrt(excess)
    peak = p.rho * g**2 / (xi**2 - g**2)
    return LineShape(LineShapeKind.DOUBLE_PEAKED, (-w_m, w_m), peak)


def spectrum_envelope(l_range: np.ndarray, flat: FlatStateBranches,
                      branch: str = "lower") -> tuple[SpectrumSeries, tuple[int, ...]]:
    """Peak spectral density versus mode number, and its maximizing modes.

    The envelope has two maxima near l = +/- sqrt(2(sigma + 2g)/zeta2)
    when that radicand is positive, otherwise a single maximum at l = 0.
    """
    l_range = np.asarray(l_range, dtype=int)
    values = np.array([classify_lineshape(int(l), flat, branch).peak_value
                       for l in l_range])
    p = flat.params
    g = kerr_shift(flat, branch)
    radicand = 2.0 * (p.sigma + 2.0 * g) / p.zeta2
    if radicand > 0.0:
        l_peak = math.sqrt(radicand)
        peaks = (-int(round(l_peak)), int(round(l_peak)))
    else:
        peaks = (0,)
    return SpectrumSeries(l_range.astype(float), values, x_label="l"), peaks


def sidemode_flux(l: int, flat: FlatStateBranches,
                  branch: str = "lower",
                  boundary_rtol: float = 1e-9) -> tuple[float, float, str]:
    """Integrated photon flux of sidemode l and the matching output power.

    Returns (R in photons/s, P_out in W, regime tag).  The weak-pumping
    form holds for g^2 < kappa^2 + xi_l^2 and the strong-pumping form for
    g^2 > kappa^2 + xi_l^2; the boundary itself is a removable-looking
    but unphysical divergence of both closed forms.
    """
    p = flat.params
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l
    margin = p.kappa**2 + xi**2 - g**2
    if abs(margin) <= boundary_rtol * p.kappa**2:
        raise RegimeBoundaryError(
            f"mode l={l} sits on the regime boundary g^2 = kappa^2 + xi_l^2, "
            "where the integrated-flux closed forms diverge unphysically")
    if margin > 0.0:
        R = p.rho * p.kappa * g**2 / margin
        regime = "weak"
    else:
        R = p.rho * p.kappa**2 * g**2 / (
            math.sqrt(g**2 - p.kappa**2) * (g**2 - p.kappa**2 - xi**2))
        regime = "strong"
    if p.omega_L is None:
        raise ValueError("ModalParams.omega_L is unset; build via "
                         "units.modal_params to convert flux to watts")
    return R, hbar * p.omega_L * R, regime


def very_weak_flux(l: int, pump_power: float, config: ResonatorConfig,
                   budget: LossBudget, sigma: float | None = None) -> tuple[float, float]:
    """Sidemode photon flux in the very-weak-pumping limit, with R_max.

    R(l) = R_max / ([1 + (sigma/kappa)^2]^2 [1 + (sigma - zeta2 l^2/2)^2/kappa^2]),
    R_max = 4 rho g0^2 kappa_t^2 / kappa^5 * (P / hbar omega_L)^2.
    """
    g0 = config.nonlinear_gain()
    zeta2 = config.dispersion_zeta2()
    s = config.detuning if sigma is None else sigma
    kappa, kappa_t, rho = budget.kappa, budget.kappa_t, budget.rho
    flux_sq = (pump_power / (hbar * config.omega_L)) ** 2
    n_flat = 2.0 * kappa_t * pump_power / (hbar * config.omega_L * (kappa**2 + s**2))
    if n_flat > 1e-2 * kappa / g0:
        raise ValueError(
            "pump too strong for the very-weak expansion: "
            f"g0|A0|^2/kappa ~ {g0 * n_flat / kappa:.3g} exceeds 1e-2")
    R_max = 4.0 * rho * g0**2 * kappa_t**2 / kappa**5 * flux_sq
    bracket0 = 1.0 + (s / kappa) ** 2
    bracket_l = 1.0 + ((s - 0.5 * zeta2 * l**2) / kappa) ** 2
    return R_max / (bracket0**2 * bracket_l), R_max


def total_spontaneous_power(pump_power: float, config: ResonatorConfig,
                            budget: LossBudget, sigma: float | None = None,
                            l_max: int | None = None) -> tuple[float, float]:
    """Total spontaneously emitted power (W) in the very-weak regime.

    Returns the closed-form continuous approximation and, for validation,
    the discrete sum of hbar*omega_L*R(l) over |l| <= l_max.

    P_total = hbar omega_L R_max pi sqrt(kappa/|zeta2|)
              * [1 + (sigma/kappa)^2]^(-9/4)
              * [1 + sgn(zeta2) (sigma/kappa)/sqrt(1 + (sigma/kappa)^2)]^(1/2).

    This is the exact continuous-in-l integral of the very-weak flux,
    via  int du / (1 + (u^2 - a)^2)
         = (pi/sqrt(2)) (1+a^2)^(-1/4) [1 + a/sqrt(1+a^2)]^(1/2)
    with a = sgn(zeta2) sigma/kappa (the dispersion curve only crosses the
    pump resonance when sigma and zeta2 share a sign).
    """
    zeta2 = config.dispersion_zeta2()
    if zeta2 == 0.0:
        raise ZeroDivisionError(
            "zeta2 = 0 gives an unphysical divergence of the total "
            "spontaneous power (every mode would emit equally)")
    s = config.detuning if sigma is None else sigma
    kappa = budget.kappa
    _, R_max = very_weak_flux(0, pump_power, config, budget, sigma=s)
    a = float(np.sign(zeta2)) * s / kappa
    one_plus = 1.0 + a**2
    closed = (hbar * config.omega_L * R_max * math.pi
              * math.sqrt(kappa / abs(zeta2))
              * one_plus ** (-2.25)
              * math.sqrt(1.0 + a / math.sqrt(one_plus)))
    if l_max is None:
        # cover the envelope far past its peak scale sqrt(2|s|+..)/zeta2
        l_scale = math.sqrt(max(2.0 * abs(s), kappa) / abs(zeta2))
        l_max = max(10 * int(math.ceil(l_scale)), 200)
    ls = np.arange(-l_max, l_max + 1)
    fluxes = R_max / ((one_plus**2)
                      * (1.0 + ((s - 0.5 * zeta2 * ls**2) / kappa) ** 2))
    discrete = float(hbar * config.omega_L * fluxes.sum())
    return closed, discrete


def flux_parseval_oracle(l: int, flat: FlatStateBranches,
                         branch: str = "lower") -> float:
    """(1/2pi) integral of S_l over omega, by adaptive quadrature.

    Independent check of the weak-regime closed-form flux.
    """
    p = flat.params
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l

    def integrand(w: float) -> float:
        denom = (p.kappa**2 - g**2 + xi**2 - w**2) ** 2 + 4.0 * p.kappa**2 * w**2
        return 4.0 * p.rho * p.kappa**2 * g**2 / denom

    points = []
    if xi**2 > p.kappa**2 + g**2:
        w_m = math.sqrt(xi**2 - p.kappa**2 - g**2)
        points = [-w_m, w_m]
    total, _ = quad(integrand, -200.0 * p.kappa, 200.0 * p.kappa,
                    points=points or None, limit=400)
    return total / (2.0 * math.pi)


def pair_correlation(l: int, flat: FlatStateBranches,
                     omega_grid: np.ndarray | None = None,
                     branch: str = "lower") -> SpectrumSeries:
    """Output correlation spectrum <a_{+l} a_{-l}> (complex, dimensionless).

    C(omega) = -rho * 2 kappa S_l / |D_l|^2 * [D_l^* + 2 kappa (R_l^* - i omega)]
    with R_l = -[kappa - i(sigma - zeta2 l^2/2)] + 2 i g0 |A0|^2,
    S_l = i g0 A0^2 and D_l = [kappa^2 - g^2 + xi_l^2 - omega^2] - 2 i kappa omega.
    """
    p = flat.params
    A0 = _pump_amplitude(flat, branch)
    if omega_grid is None:
        omega_grid = default_omega_grid(l, flat, branch)
    g = kerr_shift(flat, branch)
    xi = sideband_shift(l, flat, branch).xi_l
    w = omega_grid * p.kappa
    R_l = -(p.kappa - 1j * (p.sigma - 0.5 * p.zeta2 * l**2)) + 2j * g
    S_l = 1j * p.g0 * A0**2
    D = (p.kappa**2 - g**2 + xi**2 - w**2) - 2j * p.kappa * w
    C = -p.rho * (2.0 * p.kappa * S_l / np.abs(D) ** 2) * (
        np.conj(D) + 2.0 * p.kappa * (np.conj(R_l) - 1j * w))
    return SpectrumSeries(np.asarray(omega_grid, dtype=float), C)


def pair_statistics(r: float, n_max: int) -> tuple[np.ndarray, float]:
    """Photon pair-number distribution of a two-mode squeezed vacuum.

    P(n) = tanh(r)^(2n) / cosh(r)^2 for the state sum_n c_n |n, n>.
    Returns probabilities for n = 0..n_max plus the geometric tail mass.
    """
    if r < 0:
        raise ValueError("squeezing parameter r must be nonnegative")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    n = np.arange(n_max + 1)
    t2 = math.tanh(r) ** 2
    probs = t2**n / math.cosh(r) ** 2
    tail = t2 ** (n_max + 1)  # geometric remainder: sum_{n>n_max} P(n)
    return probs, float(tail)


# ---------------------------------------------------------------------------
# CSV emitters
# ---------------------------------------------------------------------------

def spectrum_csv(series: SpectrumSeries) -> str:
    lines = [f"{series.x_label},S"]
    for x, v in zip(series.x, series.values):
        if np.iscomplexobj(series.values):
            lines.append(f"{x:.12e},{v.real:.12e}{v.imag:+.12e}j")
        else:
            lines.append(f"{x:.12e},{v:.12e}")
    return "\n".join(lines) + "\n"


def envelope_csv(l_range: np.ndarray, flat: FlatStateBranches,
                 branch: str = "lower") -> str:
    series, _ = spectrum_envelope(l_range, flat, branch)
    lines = ["l,S_env,kind"]
    for l, v in zip(series.x, series.values):
        kind = classify_lineshape(int(l), flat, branch).kind.value
        lines.append(f"{int(l)},{v:.12e},{kind}")
    return "\n".join(lines) + "\n"


def flux_table_csv(l_range: np.ndarray, flat: FlatStateBranches,
                   branch: str = "lower") -> str:
    lines = ["l,R_out,P_out_watts,regime"]
    for l in l_range:
        R, P, regime = sidemode_flux(int(l), flat, branch)
        lines.append(f"{int(l)},{R:.12e},{P:.12e},{regime}")
    return "\n".join(lines) + "\n"
