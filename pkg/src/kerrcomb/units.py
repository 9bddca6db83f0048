"""Physical parameter model and SI <-> normalized conversions.

All rates are stored internally as half-linewidths kappa (rad/s); full
linewidths 2*kappa only appear at I/O boundaries.  The detuning sigma is
the pump laser angular frequency minus the pumped-mode resonance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.constants import c as C_LIGHT, hbar as HBAR


class Topology(enum.Enum):
    ADD_THROUGH = "add-through"
    ADD_DROP = "add-drop"


class ConfigurationError(ValueError):
    """Inconsistent or incomplete resonator description."""


@dataclass(frozen=True)
class ResonatorConfig:
    """Physical description of the resonator, pump and coupling topology.

    Exactly one of (gamma, g0) and one of (zeta2, beta2) must be supplied;
    the other member of each pair is derived.  drop_Q is required for (and
    only allowed in) the add-drop topology.
    """

    pump_wavelength: float          # m
    main_radius: float              # m
    group_index: float
    intrinsic_Q: float
    through_Q: float
    pump_power: float               # W
    detuning: float                 # rad/s, sigma = omega_L - omega_0
    topology: Topology = Topology.ADD_THROUGH
    drop_Q: float | None = None
    gamma: float | None = None      # W^-1 m^-1
    g0: float | None = None         # rad/s per photon
    zeta2: float | None = None      # rad/s
    beta2: float | None = None      # s^2/m

    def __post_init__(self):
        if self.pump_wavelength <= 0 or self.main_radius <= 0:
            raise ConfigurationError("wavelength and radius must be positive")
        if self.intrinsic_Q <= 0 or self.through_Q <= 0:
            raise ConfigurationError("Q factors must be positive")
        if self.topology is Topology.ADD_DROP:
            if self.drop_Q is None or self.drop_Q <= 0:
                raise ConfigurationError("add-drop topology requires a positive drop_Q")
        elif self.drop_Q is not None:
            raise ConfigurationError("drop_Q only applies to the add-drop topology")
        if (self.gamma is None) == (self.g0 is None):
            raise ConfigurationError("supply exactly one of gamma, g0")
        if (self.zeta2 is None) == (self.beta2 is None):
            raise ConfigurationError("supply exactly one of zeta2, beta2")
        if self.pump_power < 0:
            raise ConfigurationError("pump power must be nonnegative")

    @property
    def omega_L(self) -> float:
        """Pump angular frequency (rad/s), vacuum wavelength."""
        return 2.0 * math.pi * C_LIGHT / self.pump_wavelength

    @property
    def group_velocity(self) -> float:
        return C_LIGHT / self.group_index

    @property
    def fsr(self) -> float:
        """Free spectral range (rad/s)."""
        return self.group_velocity / self.main_radius

    def nonlinear_gain(self) -> float:
        """Per-photon Kerr gain g0 (rad/s), derived from gamma if needed."""
        if self.g0 is not None:
            return self.g0
        return g0_from_gamma(self.gamma, self.main_radius, self.group_index,
                             self.omega_L)

    def dispersion_zeta2(self) -> float:
        """Modal second-order dispersion zeta2 (rad/s)."""
        if self.zeta2 is not None:
            return self.zeta2
        return zeta2_from_beta2(self.beta2, self.group_index, self.fsr)


@dataclass(frozen=True)
class LossBudget:
    """Half-linewidths per port plus the out-coupling ratio rho."""

    kappa_t: float
    kappa_i: float
    kappa_d: float
    kappa: float
    rho: float
    fsr: float


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless LLE parameters."""

    alpha: float        # -sigma/kappa
    beta: float         # -zeta2/kappa
    F: float            # pump amplitude, F = 1 at the absolute minimum power
    g0_over_kappa: float


@dataclass(frozen=True)
class ModalParams:
    """Everything the modal equations need, in rad/s and sqrt(photon) units."""

    kappa: float
    kappa_t: float
    sigma: float
    zeta2: float
    g0: float
    A_in: float         # photons^(1/2) s^(-1/2)
    rho: float
    topology: Topology = Topology.ADD_THROUGH
    omega_L: float | None = None   # pump carrier (rad/s), for flux->watts


# conversions -----------------------------------------------------------

def g0_from_gamma(gamma: float, radius: float, n_g: float, omega_L: float) -> float:
    """g0 = gamma * v_g^2 * hbar * omega_L / (2 pi a)."""
    v_g = C_LIGHT / n_g
    return gamma * v_g**2 * HBAR * omega_L / (2.0 * math.pi * radius)


def gamma_from_g0(g0: float, radius: float, n_g: float, omega_L: float) -> float:
    v_g = C_LIGHT / n_g
    return g0 * 2.0 * math.pi * radius / (v_g**2 * HBAR * omega_L)


def zeta2_from_beta2(beta2: float, n_g: float, fsr: float) -> float:
    """beta2 = -zeta2 / (v_g * fsr^2), inverted."""
    v_g = C_LIGHT / n_g
    return -beta2 * v_g * fsr**2


def beta2_from_zeta2(zeta2: float, n_g: float, fsr: float) -> float:
    v_g = C_LIGHT / n_g
    return -zeta2 / (v_g * fsr**2)


def kappa_from_Q(Q: float, omega_L: float) -> float:
    """Half-linewidth from a quality factor (full linewidth = omega/Q)."""
    return omega_L / (2.0 * Q)


def Q_from_kappa(kappa: float, omega_L: float) -> float:
    return omega_L / (2.0 * kappa)


def effective_area_estimate(pump_wavelength: float, n_g: float, radius: float) -> float:
    """Spherical-WGM effective area (m^2); an upper-bound estimate, advisory
    only and never used in spectra."""
    return (pump_wavelength / n_g) ** (7.0 / 6.0) * radius ** (5.0 / 6.0)


# operations ------------------------------------------------------------

def derive_loss_budget(config: ResonatorConfig) -> LossBudget:
    """Per-port half-linewidths, total loss and squeezing factor rho."""
    omega_L = config.omega_L
    kappa_i = kappa_from_Q(config.intrinsic_Q, omega_L)
    kappa_t = kappa_from_Q(config.through_Q, omega_L)
    if config.topology is Topology.ADD_DROP:
        kappa_d = kappa_from_Q(config.drop_Q, omega_L)
        kappa = kappa_t + kappa_i + kappa_d
        rho = kappa_d / kappa
    else:
        kappa_d = 0.0
        kappa = kappa_t + kappa_i
        rho = kappa_t / kappa
    return LossBudget(kappa_t=kappa_t, kappa_i=kappa_i, kappa_d=kappa_d,
                      kappa=kappa, rho=rho, fsr=config.fsr)


def pump_photon_flux(P: float, omega_L: float) -> float:
    """Drive amplitude A_in = sqrt(P / hbar omega_L), in s^(-1/2)."""
    if P < 0:
        raise ValueError("pump power must be nonnegative")
    return math.sqrt(P / (HBAR * omega_L))


def min_pump_power(budget: LossBudget, g0: float, omega_L: float) -> tuple[float, float]:
    """Absolute minimum pump power (W) for comb generation and the matching
    minimal intracavity photon number kappa/g0.

    P_min = hbar*omega_L * (2 kappa)^3 / (8 g0 * 2 kappa_t).
    """
    if g0 <= 0:
        raise ValueError("g0 must be positive")
    d_tot = 2.0 * budget.kappa
    d_ext = 2.0 * budget.kappa_t
    p_min = HBAR * omega_L * d_tot**3 / (8.0 * g0 * d_ext)
    n_min = budget.kappa / g0
    return p_min, n_min


def threshold_pump_power(budget: LossBudget, g0: float, omega_L: float,
                         sigma: float) -> float:
    """P_th = P_min * [1 + (1 + sigma/kappa)^2]."""
    p_min, _ = min_pump_power(budget, g0, omega_L)
    return p_min * (1.0 + (1.0 + sigma / budget.kappa) ** 2)


class NoRollOrderError(ValueError):
    """No modulational-instability roll order exists for these parameters."""


def predicted_roll_order(sigma: float, kappa: float, zeta2: float) -> int:
    """Near-threshold roll order: nearest integer to sqrt(2(sigma+2kappa)/zeta2).

    Ties round away from zero.  A zero radicand gives the L = 0 boundary
    signal; a negative radicand raises NoRollOrderError.
    """
    radicand = 2.0 * (sigma + 2.0 * kappa) / zeta2
    if radicand < 0:
        raise NoRollOrderError(
            "no modulational-instability roll order: 2(sigma+2kappa)/zeta2 < 0")
    x = math.sqrt(radicand)
    return int(math.floor(x + 0.5))


def normalize(config: ResonatorConfig, budget: LossBudget) -> NormalizedParams:
    """Dimensionless LLE parameters (alpha, beta, F, g0/kappa)."""
    g0 = config.nonlinear_gain()
    zeta2 = config.dispersion_zeta2()
    kappa = budget.kappa
    d_tot = 2.0 * kappa
    d_ext = 2.0 * budget.kappa_t
    F = math.sqrt(8.0 * g0 * d_ext / d_tot**3) * pump_photon_flux(
        config.pump_power, config.omega_L)
    return NormalizedParams(alpha=-config.detuning / kappa,
                            beta=-zeta2 / kappa,
                            F=F,
                            g0_over_kappa=g0 / kappa)


def modal_params(config: ResonatorConfig, budget: LossBudget | None = None,
                 pump_power: float | None = None,
                 sigma: float | None = None) -> ModalParams:
    """Bundle the modal-equation parameters, optionally overriding P or sigma."""
    if budget is None:
        budget = derive_loss_budget(config)
    P = config.pump_power if pump_power is None else pump_power
    s = config.detuning if sigma is None else sigma
    return ModalParams(kappa=budget.kappa, kappa_t=budget.kappa_t,
                       sigma=s, zeta2=config.dispersion_zeta2(),
                       g0=config.nonlinear_gain(),
                       A_in=pump_photon_flux(P, config.omega_L),
                       rho=budget.rho, topology=config.topology,
                       omega_L=config.omega_L)
