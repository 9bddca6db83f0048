"""Output squeezing spectra of sidemode pairs above threshold.

The intracavity pair-difference quadratures relax under the real flow
matrix J_q (see linearization); input vacuum enters through the coupler
and the output field is the interference of the reflected input with the
leaked intracavity field.  The resulting stationary output correlation
matrix at analysis frequency omega is

    C_out(w) = [2 k r (J_q + i w I)^-1 + I] C_in [2 k r (J_q - i w I)^-1 + I]^T
               + 4 k^2 r (1 - r) (J_q + i w I)^-1 C_in [(J_q - i w I)^-1]^T

with r = rho the escape efficiency, k = kappa the total half-linewidth
and C_in the frequency-independent vacuum correlation matrix.  Quadrature
spectra at arbitrary angle follow from the diagonal blocks of C_out and
are normalized so that shot noise is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linearization import build_quadrature_jacobian
from .spontaneous import SpectrumSeries
from .steady_state import CombState

#: Imaginary residue tolerated on (and stripped from) real spectra.
IMAG_TOL = 1e-10


class ResolventError(np.linalg.LinAlgError):
    """(J_q +/- i omega I) is singular at this frequency (neutral mode)."""


@dataclass(frozen=True)
class PairSpectralBlocks:
    """Diagonal C_out entries of one mode pair over a frequency grid."""

    l: int
    omega_over_kappa: np.ndarray
    c11: np.ndarray      # <q q> spectrum of the pair
    c22: np.ndarray      # <p p>
    c12_plus_c21: np.ndarray


@dataclass(frozen=True)
class QuadratureSpectrum:
    l: int
    phi: float
    series: SpectrumSeries


@dataclass(frozen=True)
class AngleOptimum:
    l: int
    Phi_l: float
    delta_Phi: float
    objective: float
    spectrum: QuadratureSpectrum
    multi_minimum: bool = False
    degenerate: bool = False


def default_omega_grid(n: int = 1024, w_max: float = 10.0) -> np.ndarray:
    """Symmetric omega/kappa grid that never contains exactly 0."""
    grid = np.linspace(-w_max, w_max, n)
    grid = grid[np.abs(grid) >= 1e-3]
    return grid


def photon_number_difference_spectrum(rho: float, kappa: float,
                                      omega_grid: np.ndarray) -> SpectrumSeries:
    """Normalized spectrum of the output pair photon-number difference.

    S(w) = 1 - rho * 4 kappa^2 / (w^2 + 4 kappa^2): shot noise at large
    |w|, and 1 - rho at w = 0.  Exact for three-mode combs.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    w = np.asarray(omega_grid, dtype=float) * kappa
    values = 1.0 - rho * 4.0 * kappa**2 / (w**2 + 4.0 * kappa**2)
    return SpectrumSeries(np.asarray(omega_grid, dtype=float), values)


def input_correlation(K: int) -> np.ndarray:
    """Vacuum quadrature correlation matrix C_in = [[I, iI], [-iI, I]]."""
    eye = np.eye(K)
    return np.block([[eye, 1j * eye], [-1j * eye, eye]])


def output_correlation(J_q: np.ndarray, rho: float, kappa: float,
                       omega: float) -> np.ndarray:
    """Output correlation matrix C_out at angular frequency omega (rad/s)."""
    n = J_q.shape[0]
    K = n // 2
    eye = np.eye(n)
    C_in = input_correlation(K)
    try:
        G_p = np.linalg.inv(J_q + 1j * omega * eye)
        G_m = np.linalg.inv(J_q - 1j * omega * eye)
    except np.linalg.LinAlgError as exc:
        raise ResolventError(
            f"J_q -/+ i omega is singular at omega = {omega:g} rad/s "
            "(neutral mode); skip this grid point") from exc
    T_p = 2.0 * kappa * rho * G_p + eye
    T_m = 2.0 * kappa * rho * G_m + eye
    return (T_p @ C_in @ T_m.T
            + 4.0 * kappa**2 * rho * (1.0 - rho) * (G_p @ C_in @ G_m.T))


def pair_spectral_blocks(J_q: np.ndarray, rho: float, kappa: float,
                         omega_grid: np.ndarray, l: int) -> PairSpectralBlocks:
    """Diagonal pair-l entries of C_out over a dimensionless grid.

    Row i = l - 1 of block C11 is the q-quadrature spectrum of pair l.
    Frequencies where the resolvent is singular are reported as NaN.
    """
    K = J_q.shape[0] // 2
    if not 1 <= l <= K:
        raise ValueError(f"pair index l must be in 1..{K}")
    i = l - 1
    omega_grid = np.asarray(omega_grid, dtype=float)
    c11 = np.empty(len(omega_grid), dtype=complex)
    c22 = np.empty_like(c11)
    c12 = np.empty_like(c11)
    for k, w in enumerate(omega_grid):
        try:
            C = output_correlation(J_q, rho, kappa, w * kappa)
        except ResolventError:
            c11[k] = c22[k] = c12[k] = np.nan
            continue
        c11[k] = C[i, i]
        c22[k] = C[K + i, K + i]
        c12[k] = C[i, K + i] + C[K + i, i]
    return PairSpectralBlocks(l, omega_grid, c11, c22, c12)


def quadrature_spectrum(blocks: PairSpectralBlocks, phi: float) -> QuadratureSpectrum:
    """Spectrum of the pair quadrature at angle phi (pair frame).

    S_phi = C11 cos^2 phi + C22 sin^2 phi + (C12 + C21) cos phi sin phi.
    """
    c, s = math.cos(phi), math.sin(phi)
    values = blocks.c11 * c**2 + blocks.c22 * s**2 + blocks.c12_plus_c21 * c * s
    finite = values[np.isfinite(values)]
    residue = float(np.max(np.abs(finite.imag))) if finite.size else 0.0
    if residue > IMAG_TOL:
        raise FloatingPointError(
            f"quadrature spectrum has imaginary residue {residue:.2e}")
    series = SpectrumSeries(blocks.omega_over_kappa, values.real)
    return QuadratureSpectrum(blocks.l, phi, series)


def analytic_three_mode_spectra(kappa_a: float, kappa_p: float, rho: float,
                                omega_grid: np.ndarray,
                                kappa: float = 1.0) -> tuple[SpectrumSeries, SpectrumSeries]:
    """Exact amplitude and phase quadrature spectra of a three-mode comb.

    S_a(w) = 1 - rho 4 kappa_a^2/(w^2 + 4 kappa_a^2),
    S_p(w) = 1 + rho (4 kappa_a^2/w^2) [1 + 4 kappa_p^2/(w^2 + 4 kappa_a^2)]^2.
    The phase spectrum diverges at w = 0; that point is reported as +inf.
    `omega_grid` is in units of `kappa`.
    """
    w = np.asarray(omega_grid, dtype=float) * kappa
    S_a = 1.0 - rho * 4.0 * kappa_a**2 / (w**2 + 4.0 * kappa_a**2)
    with np.errstate(divide="ignore"):
        S_p = 1.0 + rho * (4.0 * kappa_a**2 / w**2) * (
            1.0 + 4.0 * kappa_p**2 / (w**2 + 4.0 * kappa_a**2)) ** 2
    S_p = np.where(w == 0.0, np.inf, S_p)
    x = np.asarray(omega_grid, dtype=float)
    return SpectrumSeries(x, S_a), SpectrumSeries(x, S_p)


def _band_objective(blocks: PairSpectralBlocks, phi: float,
                    band: tuple[float, float], objective: str) -> float:
    spec = quadrature_spectrum(blocks, phi)
    w = np.abs(spec.series.x)
    sel = (w >= band[0]) & (w <= band[1]) & np.isfinite(spec.series.values)
    values = spec.series.values[sel]
    if objective == "min":
        return float(values.min())
    # a symmetric grid makes |omega| non-monotonic; sort before integrating
    order = np.argsort(w[sel])
    return float(np.trapezoid(values[order], w[sel][order]))


def optimize_quadrature_angle(state: CombState, l: int,
                              omega_grid: np.ndarray | None = None,
                              band: tuple[float, float] = (0.1, 10.0),
                              half_width: float = math.pi / 4,
                              n_scan: int = 121,
                              tol: float = 1e-5,
                              objective: str = "band_integral") -> AngleOptimum:
    """Angle minimizing a squeezing objective of the pair spectrum.

    J_q is built in the pair's natural frame, so the scanned angle is the
    residual offset delta-Phi around the pair phase Phi_l; the scan
    covers [-half_width, +half_width] and is refined by golden-section
    search to `tol` radians.  `objective` is either "band_integral"
    (integral of S over the band, good for near-Lorentzian dips) or "min"
    (deepest point of S in the band, robust when anti-squeezing at low
    frequency dominates the integral, as for soliton pairs).  Band,
    window and objective are configurable because "best squeezing" is a
    modeling choice, not a law.
    """
    if objective not in ("band_integral", "min"):
        raise ValueError("objective must be 'band_integral' or 'min'")
    jac = build_quadrature_jacobian(state)
    p = state.params
    if omega_grid is None:
        omega_grid = default_omega_grid()
    blocks = pair_spectral_blocks(jac.J_q, p.rho, p.kappa, omega_grid, l)
    Phi_l = float(jac.pair_rotation[l - 1])

    phis = np.linspace(-half_width, half_width, n_scan)
    objs = np.array([_band_objective(blocks, ph, band, objective)
                     for ph in phis])
    spread = objs.max() - objs.min()
    if spread <= 1e-12 * max(abs(objs.max()), 1.0):
        best = quadrature_spectrum(blocks, 0.0)
        return AngleOptimum(l, Phi_l, 0.0, float(objs[0]), best,
                            degenerate=True)
    k0 = int(np.argmin(objs))
    interior = objs[1:-1]
    minima = np.flatnonzero((interior < objs[:-2]) & (interior <= objs[2:])) + 1
    multi = len(minima) > 1

    lo = phis[max(k0 - 1, 0)]
    hi = phis[min(k0 + 1, n_scan - 1)]
    inv_gold = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_gold * (hi - lo)
    x2 = lo + inv_gold * (hi - lo)
    f1 = _band_objective(blocks, x1, band, objective)
    f2 = _band_objective(blocks, x2, band, objective)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_gold * (hi - lo)
            f1 = _band_objective(blocks, x1, band, objective)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_gold * (hi - lo)
            f2 = _band_objective(blocks, x2, band, objective)
    delta = 0.5 * (lo + hi)
    obj = _band_objective(blocks, delta, band, objective)
    best = quadrature_spectrum(blocks, delta)
    return AngleOptimum(l, Phi_l, float(delta), obj, best,
                        multi_minimum=multi)


def spectrum_csv(spec: QuadratureSpectrum) -> str:
    lines = [f"# pair l={spec.l}, phi={spec.phi:.6f} rad (pair frame)",
             "omega_over_kappa,S"]
    for x, v in zip(spec.series.x, spec.series.values):
        lines.append(f"{x:.12e},{v:.12e}")
    return "\n".join(lines) + "\n"


def optimum_report(opt: AngleOptimum) -> dict:
    return {
        "l": opt.l,
        "Phi_l": opt.Phi_l,
        "delta_Phi": opt.delta_Phi,
        "objective": opt.objective,
        "flags": {"multi_minimum": opt.multi_minimum,
                  "degenerate": opt.degenerate},
    }
