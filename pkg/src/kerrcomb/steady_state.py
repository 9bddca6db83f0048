"""Stationary intracavity field patterns of a driven Kerr resonator.

The modal amplitudes A_l (photon-number normalized, frame rotating at the
pump and on the cold-cavity grid) obey

    dA_l/dt = -[kappa - i(sigma - zeta2 l^2/2)] A_l
              + delta(l) sqrt(2 kappa_t) A_in
              + i g0 sum_{m-n+p=l} A_m A_n^* A_p .

This module finds roots of that flow: the homogeneous (flat) branches in
closed form, and patterned states (rolls, bright/dark solitons) by
split-step relaxation followed by Newton refinement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import _modal
from .units import ModalParams, NoRollOrderError, predicted_roll_order

#: Relative Newton residual (|F| / (kappa |A|)) accepted as stationary.
NEWTON_TOL = 1e-12
#: Relative flow norm at which split-step relaxation is considered settled.
RELAX_TOL = 1e-9
#: Relative modal intensity below which a mode counts as unexcited.
PATTERN_FLOOR = 1e-12


class PatternKind(enum.Enum):
    FLAT = "flat"
    ROLL = "roll"
    BRIGHT_SOLITON = "bright_soliton"
    DARK_SOLITON = "dark_soliton"
    UNCLASSIFIED = "unclassified"


class DivergenceError(RuntimeError):
    """Split-step propagation blew up (non-finite or runaway norm)."""

    def __init__(self, message: str, last_amps: np.ndarray | None = None):
        super().__init__(message)
        self.last_amps = last_amps


class RefinementError(RuntimeError):
    """Newton iteration failed to enter its quadratic convergence basin."""

    def __init__(self, message: str, best_amps: np.ndarray | None = None,
                 best_residual: float = np.inf):
        super().__init__(message)
        self.best_amps = best_amps
        self.best_residual = best_residual


@dataclass(frozen=True)
class FlatStateBranches:
    """Real roots N of the homogeneous steady-state cubic.

    N [kappa^2 + (sigma + g0 N)^2] = 2 kappa_t A_in^2, with the complex
    amplitude recovered as A0 = sqrt(2 kappa_t) A_in / (kappa - i(sigma+g0 N)).
    """

    photon_numbers: tuple[float, ...]        # ascending
    amplitudes: tuple[complex, ...]
    params: ModalParams

    @property
    def lower(self) -> complex:
        return self.amplitudes[0]

    @property
    def upper(self) -> complex:
        return self.amplitudes[-1]

    @property
    def middle(self) -> complex:
        if len(self.amplitudes) != 3:
            raise ValueError("middle branch only exists in the bistable regime")
        return self.amplitudes[1]

    @property
    def bistable(self) -> bool:
        return len(self.photon_numbers) == 3


@dataclass(frozen=True)
class CombState:
    """A (candidate) stationary modal field."""

    amplitudes: np.ndarray                   # complex, natural order -K..K
    params: ModalParams
    residual_norm: float                     # max|dA/dt| / (kappa ||A||)
    pattern: PatternKind = PatternKind.UNCLASSIFIED
    roll_order: int | None = None
    seed: int | None = None
    converged: bool = False

    @property
    def K(self) -> int:
        return (len(self.amplitudes) - 1) // 2

    @property
    def mode_numbers(self) -> np.ndarray:
        return _modal.mode_numbers(self.K)

    @property
    def photon_number(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def intensities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def solve_flat_state(params: ModalParams) -> FlatStateBranches:
    """All real nonnegative roots of the homogeneous cubic, ascending."""
    g0, kappa, sigma = params.g0, params.kappa, params.sigma
    drive = 2.0 * params.kappa_t * params.A_in**2
    # g0^2 N^3 + 2 sigma g0 N^2 + (kappa^2 + sigma^2) N - drive = 0
    roots = np.roots([g0**2, 2.0 * sigma * g0, kappa**2 + sigma**2, -drive])
    real = np.sort(roots[np.abs(roots.imag) < 1e-8 * np.abs(roots).max()].real)
    real = real[real >= 0.0]
    amps = tuple(np.sqrt(2.0 * params.kappa_t) * params.A_in
                 / (kappa - 1j * (sigma + g0 * N)) for N in real)
    return FlatStateBranches(tuple(float(N) for N in real), amps, params)


def residual(amps: np.ndarray, params: ModalParams) -> float:
    """Dimensionless flow norm max_l |dA_l/dt| / (kappa ||A||)."""
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        return np.inf
    F = _modal.vector_field(amps, params)
    return float(np.max(np.abs(F))) / (params.kappa * norm)


def field_on_circle(amps: np.ndarray, n_theta: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Angular field A(theta) = sum_l A_l exp(i l theta) on a uniform grid."""
    K = (len(amps) - 1) // 2
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    spec = np.zeros(n_theta, dtype=complex)
    spec[np.arange(-K, K + 1) % n_theta] = amps
    return theta, n_theta * np.fft.ifft(spec)


# ---------------------------------------------------------------------------
# split-step relaxation
# ---------------------------------------------------------------------------

def _fft_size(K: int) -> int:
    """Padded grid large enough that the cubic term is alias-free."""
    n = 1
    while n < 3 * (2 * K + 1):
        n *= 2
    return n


def propagate(amps: np.ndarray, params: ModalParams, horizon: float,
              step: float = 1e-3, stop_residual: float = RELAX_TOL,
              check_every: int = 200) -> tuple[np.ndarray, float]:
    """Relax the modal flow by Strang-split integration.

    `horizon` and `step` are in units of 1/kappa.  The linear + drive
    half-step is exact in mode space (the driven mode gets the exact
    affine update); the Kerr step is an exact phase rotation in angle
    space on an alias-free padded grid.  Returns the final amplitudes and
    their dimensionless residual; stops early once `stop_residual` is met.
    """
    K = (len(amps) - 1) // 2
    n = _fft_size(K)
    idx = _modal.mode_numbers(K) % n
    dt = step / params.kappa

    lam = _modal.linear_rates(params, K)
    half = np.exp(lam * dt / 2.0)
    pump = np.sqrt(2.0 * params.kappa_t) * params.A_in
    lam0 = lam[K]
    pump_half = pump * (half[K] - 1.0) / lam0

    a = amps.astype(complex).copy()
    spec = np.zeros(n, dtype=complex)
    n_steps = max(1, int(round(horizon / step)))
    res = residual(a, params)
    scale = float(np.max(np.abs(a))) + abs(pump) / params.kappa

    for i in range(n_steps):
        a *= half
        a[K] += pump_half
        spec[idx] = a
        field = np.fft.ifft(spec) * n
        field *= np.exp(1j * params.g0 * dt * np.abs(field) ** 2)
        spec_out = np.fft.fft(field) / n
        a = spec_out[idx]
        a *= half
        a[K] += pump_half
        if not np.isfinite(a).all() or np.max(np.abs(a)) > 1e6 * scale:
            raise DivergenceError(
                f"field diverged after {i + 1} steps (dt = {step}/kappa)", a)
        if (i + 1) % check_every == 0:
            res = residual(a, params)
            if res < stop_residual:
                break
        spec[idx] = 0.0
    else:
        res = residual(a, params)
    return a, res


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------

def refine(amps: np.ndarray, params: ModalParams, tol: float = NEWTON_TOL,
           max_iter: int = 60) -> tuple[np.ndarray, float]:
    """Polish a near-stationary field by damped Newton iteration.

    The linear solve uses a minimum-norm least-squares step, so neutral
    directions of patterned states (e.g. roll translation) receive no
    update instead of making the Jacobian solve singular.
    """
    a = amps.astype(complex).copy()
    best, best_res = a.copy(), residual(a, params)
    worse_streak = 0
    for _ in range(max_iter):
        F = _modal.vector_field(a, params)
        res = float(np.max(np.abs(F))) / (params.kappa * np.linalg.norm(a))
        if res < best_res:
            best, best_res, worse_streak = a.copy(), res, 0
        else:
            worse_streak += 1
            if worse_streak >= 3:
                raise RefinementError(
                    "Newton iteration stalled outside its convergence basin",
                    best, best_res)
        if res <= tol:
            return a, res
        R, S = _modal.build_RS(a, params)
        J = _modal.real_jacobian(R, S)
        rhs = -np.concatenate([F.real, F.imag])
        dx, *_ = np.linalg.lstsq(J, rhs, rcond=1e-10)
        n = len(a)
        a = a + (dx[:n] + 1j * dx[n:])
        if not np.isfinite(a).all():
            raise RefinementError("Newton step produced non-finite amplitudes",
                                  best, best_res)
    if best_res <= tol:
        return best, best_res
    raise RefinementError(
        f"Newton did not reach tolerance {tol:g} in {max_iter} iterations",
        best, best_res)


# ---------------------------------------------------------------------------
# classification and symmetrization
# ---------------------------------------------------------------------------

def classify(amps: np.ndarray, params: ModalParams) -> tuple[PatternKind, int | None]:
    """Label a stationary field by its excited-mode structure.

    Rolls excite only multiples of a fundamental order L >= 2; solitons
    excite every mode, with bright vs dark decided by whether the angular
    intensity is a localized peak or a localized dip on its pedestal.
    """
    I = np.abs(amps) ** 2
    K = (len(amps) - 1) // 2
    floor = PATTERN_FLOOR * I.max()
    excited = np.flatnonzero(I > floor) - K
    side = np.abs(excited[excited != 0])
    if side.size == 0:
        return PatternKind.FLAT, None
    L = int(side.min())
    if L >= 2 and np.all(side % L == 0):
        return PatternKind.ROLL, L
    if L == 1 and side.size <= 2:
        return PatternKind.ROLL, 1
    _, field = field_on_circle(amps, 1024)
    prof = np.abs(field) ** 2
    med = float(np.median(prof))
    peak = prof.max() - med
    dip = med - prof.min()
    if peak > 3.0 * dip and params.zeta2 > 0:
        return PatternKind.BRIGHT_SOLITON, None
    if dip > 3.0 * peak and params.zeta2 < 0:
        return PatternKind.DARK_SOLITON, None
    return PatternKind.UNCLASSIFIED, None


def rotate_to_symmetric(state: CombState) -> CombState:
    """Rotate the pattern so that A_{-l} = A_{+l} for every mode pair.

    A stationary pattern is only defined up to rigid rotation; quadrature
    analysis of +/-l mode pairs requires the representative with exactly
    symmetric amplitudes.  The rotation angle is fixed by the strongest
    sidemode pair and the result is checked on all pairs.
    """
    a = state.amplitudes.copy()
    K = state.K
    I = np.abs(a) ** 2
    I0 = I.copy()
    I0[K] = 0.0
    if I0.max() <= PATTERN_FLOOR * I.max():
        return state
    l0 = abs(int(np.argmax(I0)) - K)
    phi_p = np.angle(a[K + l0])
    phi_m = np.angle(a[K - l0])
    theta0 = -(phi_p - phi_m) / (2.0 * l0)
    a = a * np.exp(1j * _modal.mode_numbers(K) * theta0)
    asym = np.max(np.abs(a[::-1] - a)) / np.max(np.abs(a))
    if asym > 1e-6:
        raise ValueError(
            f"state is not symmetrizable by rotation (asymmetry {asym:.2e}); "
            "quadrature analysis needs a reflection-symmetric pattern")
    return replace(state, amplitudes=a)


# ---------------------------------------------------------------------------
# seeds and driver
# ---------------------------------------------------------------------------

def _flat_vector(branch_amp: complex, K: int) -> np.ndarray:
    a = np.zeros(2 * K + 1, dtype=complex)
    a[K] = branch_amp
    return a


def seed_roll(params: ModalParams, K: int, seed: int = 0,
              noise: float = 1e-6,
              target_order: int | None = None) -> np.ndarray:
    """Flat lower branch plus deterministic broadband noise.

    With `target_order` set, a small coherent modulation at that order is
    added on top of the noise.  Several roll orders inside the instability
    band are stable attractors; which one a run settles on depends on the
    initial condition, and this is the knob that selects it.
    """
    branches = solve_flat_state(params)
    a = _flat_vector(branches.lower, K)
    rng = np.random.default_rng(seed)
    scale = max(abs(branches.lower), 1.0)
    a += noise * scale * (rng.standard_normal(2 * K + 1)
                          + 1j * rng.standard_normal(2 * K + 1))
    if target_order is not None:
        if not 1 <= target_order <= K:
            raise ValueError("target_order must be in 1..K")
        a[K + target_order] += 1e-3 * scale
        a[K - target_order] += 1e-3 * scale
    return a


def seed_bright_soliton(params: ModalParams, K: int,
                        n_theta: int | None = None) -> np.ndarray:
    """Analytic sech pulse on the lower flat background (zeta2 > 0)."""
    if params.zeta2 <= 0:
        raise ValueError("bright solitons require anomalous dispersion (zeta2 > 0)")
    kappa, g0 = params.kappa, params.g0
    alpha = -params.sigma / kappa
    if alpha <= 0:
        raise ValueError("bright soliton seed needs red detuning (sigma < 0)")
    branches = solve_flat_state(params)
    F2 = 8.0 * g0 * params.kappa_t * params.A_in**2 / kappa**3
    cos_phi = np.clip(np.sqrt(8.0 * alpha) / (np.pi * np.sqrt(F2)), -1.0, 1.0)
    phi0 = np.arccos(cos_phi)
    width = np.sqrt(alpha * 2.0 * kappa / params.zeta2)
    n = n_theta or _fft_size(K)
    theta = np.linspace(-np.pi, np.pi, n, endpoint=False)
    psi = (np.sqrt(2.0 * alpha) * np.exp(1j * phi0) / np.cosh(width * theta))
    field = branches.lower + np.sqrt(kappa / g0) * psi
    spec = np.fft.fft(field) / n
    # undo the theta offset: grid starts at -pi, not 0
    spec *= np.exp(-1j * np.fft.fftfreq(n, d=1.0 / n) * np.pi)
    idx = _modal.mode_numbers(K) % n
    return spec[idx].astype(complex)


def seed_dark_soliton(params: ModalParams, K: int,
                      n_theta: int | None = None,
                      dip_width: float = 0.15) -> np.ndarray:
    """Localized dip on the upper flat branch (zeta2 < 0)."""
    if params.zeta2 >= 0:
        raise ValueError("dark solitons require normal dispersion (zeta2 < 0)")
    branches = solve_flat_state(params)
    upper = branches.upper
    n = n_theta or _fft_size(K)
    theta = np.linspace(-np.pi, np.pi, n, endpoint=False)
    # tanh-kink pair: field passes near zero at theta = 0 and recovers
    profile = np.tanh(theta / dip_width) ** 2
    low = branches.lower if branches.bistable else 0.0
    field = low + (upper - low) * profile
    spec = np.fft.fft(field) / n
    spec *= np.exp(-1j * np.fft.fftfreq(n, d=1.0 / n) * np.pi)
    idx = _modal.mode_numbers(K) % n
    return spec[idx].astype(complex)


def default_mode_cutoff(params: ModalParams, kind: str) -> int:
    """Truncation order: generous multiple of the expected pattern scale."""
    if kind in ("bright_soliton", "dark_soliton"):
        return 128
    try:
        L = predicted_roll_order(params.sigma, params.kappa, params.zeta2)
    except NoRollOrderError:
        L = 16
    return max(4 * L, 64)


def find_steady_state(params: ModalParams, kind: str = "roll",
                      K: int | None = None, seed: int = 0,
                      horizon: float = 3000.0, step: float = 1e-2,
                      target_order: int | None = None,
                      initial: np.ndarray | None = None) -> CombState:
    """Relax from a pattern-appropriate seed, then Newton-polish.

    `kind` selects the seed: "flat" (no relaxation needed), "roll",
    "bright_soliton", or "dark_soliton".  Returns a classified CombState
    whose residual meets NEWTON_TOL, or raises RefinementError /
    DivergenceError.
    """
    if K is None:
        K = default_mode_cutoff(params, kind)
    if initial is not None:
        a0 = initial.astype(complex)
        K = (len(a0) - 1) // 2
    elif kind == "flat":
        branches = solve_flat_state(params)
        a, res = refine(_flat_vector(branches.lower, K), params)
        pat, order = classify(a, params)
        return CombState(a, params, res, pat, order, seed, converged=True)
    elif kind == "roll":
        a0 = seed_roll(params, K, seed=seed, target_order=target_order)
    elif kind == "bright_soliton":
        a0 = seed_bright_soliton(params, K)
    elif kind == "dark_soliton":
        a0 = seed_dark_soliton(params, K)
    else:
        raise ValueError(f"unknown steady-state kind {kind!r}")

    # relax only far enough to put Newton inside its capture basin; the
    # slow modes near threshold make full split-step convergence costly
    a, res = propagate(a0, params, horizon, step=step, stop_residual=1e-7)
    a, res = refine(a, params)
    pat, order = classify(a, params)
    return CombState(a, params, res, pat, order, seed, converged=True)
