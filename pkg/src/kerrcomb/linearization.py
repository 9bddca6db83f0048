"""Linearized quantum-fluctuation flow around a stationary comb state.

Fluctuations delta-a_l around a stationary field obey

    d(delta a_l)/dt = sum_p R_lp delta a_p + S_lp delta a_p^dagger + noise,

with R and S determined by the stationary amplitudes.  This module builds
the complex block Jacobian J_a = [[R, S], [S*, R*]] governing that flow,
its eigenvalue (stability) spectrum, and — for reflection-symmetric
states — the real 2K x 2K quadrature Jacobian J_q acting on the
difference coordinates D_l = delta a_{+l} - delta a_{-l} of the K
sidemode pairs, each pair pre-rotated into its natural phase frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _modal
from .steady_state import CombState, PatternKind

#: Residual gate: states with larger dimensionless residual are refused.
RESIDUAL_GATE = 1e-8
#: Relative modal intensity below which a pair phase is undefined.
AMPLITUDE_FLOOR = 1e-12
#: A state is reported stable when max Re(eig J_a) <= this multiple of kappa
#: (neutral translation modes of patterned states sit at ~0).
STABILITY_TOL = 1e-6


@dataclass(frozen=True)
class BlockJacobian:
    """Linear fluctuation flow around a stationary state.

    R, S and J_a always refer to the modal (annihilation-operator) flow.
    U_plus/U_minus/J_q are filled by the quadrature builder only; pair row
    i of J_q (0-based) corresponds to mode pair l = i + 1.
    """

    K: int
    R: np.ndarray
    S: np.ndarray
    J_a: np.ndarray
    U_plus: np.ndarray | None = None
    U_minus: np.ndarray | None = None
    J_q: np.ndarray | None = None
    pair_rotation: np.ndarray | None = None   # Phi_l applied per pair, l=1..K


@dataclass(frozen=True)
class PairPhase:
    l: int
    Phi_l: float          # (phi_l + phi_{-l})/2, reduced to (-pi, pi]
    defined: bool = True


def _gate(state: CombState) -> None:
    if state.residual_norm > RESIDUAL_GATE:
        raise ValueError(
            f"state residual {state.residual_norm:.2e} exceeds the "
            f"linearization gate {RESIDUAL_GATE:g}; refine the state first")


def build_modal_jacobian(state: CombState) -> BlockJacobian:
    """R, S and the composite block Jacobian J_a = [[R, S], [S*, R*]]."""
    _gate(state)
    R, S = _modal.build_RS(state.amplitudes, state.params)
    J_a = np.block([[R, S], [S.conj(), R.conj()]])
    return BlockJacobian(K=state.K, R=R, S=S, J_a=J_a)


def stability_spectrum(J_a: np.ndarray) -> np.ndarray:
    """Eigenvalues of the modal flow, sorted by descending real part."""
    eig = np.linalg.eigvals(J_a)
    return eig[np.argsort(-eig.real)]


def is_stable(J_a: np.ndarray, kappa: float) -> bool:
    return float(stability_spectrum(J_a)[0].real) <= STABILITY_TOL * kappa


def pair_phases(state: CombState) -> list[PairPhase]:
    """Half-sum phase Phi_l = (arg A_l + arg A_{-l})/2 for l = 1..K.

    Pairs whose intensity sits below the amplitude floor carry no
    meaningful phase and are flagged undefined (Phi_l reported as 0).
    """
    a = state.amplitudes
    K = state.K
    floor = AMPLITUDE_FLOOR * float(np.max(np.abs(a) ** 2))
    out = []
    for l in range(1, K + 1):
        ap, am = a[K + l], a[K - l]
        if abs(ap) ** 2 <= floor or abs(am) ** 2 <= floor:
            out.append(PairPhase(l, 0.0, defined=False))
            continue
        phi = 0.5 * (np.angle(ap) + np.angle(am))
        phi = math.remainder(phi, 2.0 * math.pi)
        if phi <= -math.pi:
            phi += 2.0 * math.pi
        out.append(PairPhase(l, float(phi)))
    return out


def build_quadrature_jacobian(state: CombState) -> BlockJacobian:
    """Real flow matrix for the pair-difference quadratures.

    Requires a reflection-symmetric state (A_{-l} = A_{+l}); then the
    difference coordinates D_l = delta a_{+l} - delta a_{-l} close among
    themselves (the pump mode drops out) with

        dD_l/dt = sum_p A_lp D_p + B_lp D_p^dagger,
        A_lp = R_{l,p} - R_{l,-p},   B_lp = S_{l,p} - S_{l,-p}.

    Each pair is pre-rotated by its phase Phi_l, giving
    U_{+/-} = A' +/- B'^* and J_q = [[Re U+, -Im U+], [Im U-, Re U-]],
    so a downstream quadrature angle phi is measured from the pair's
    natural frame.
    """
    _gate(state)
    a = state.amplitudes
    K = state.K
    asym = float(np.max(np.abs(a[::-1] - a)) / np.max(np.abs(a)))
    if asym > 1e-6:
        raise ValueError(
            f"pair quadratures need a reflection-symmetric state; "
            f"asymmetry {asym:.2e} (use rotate_to_symmetric first)")
    R, S = _modal.build_RS(a, state.params)
    # rows/cols of R, S are indexed by mode number l - K
    lp = np.arange(1, K + 1)
    A = R[np.ix_(K + lp, K + lp)] - R[np.ix_(K + lp, K - lp)]
    B = S[np.ix_(K + lp, K + lp)] - S[np.ix_(K + lp, K - lp)]
    phis = np.array([p.Phi_l for p in pair_phases(state)])
    rot = np.exp(1j * phis)
    A = A * (rot[None, :] / rot[:, None])          # e^{i(Phi_p - Phi_l)}
    B = B / (rot[None, :] * rot[:, None])          # e^{-i(Phi_p + Phi_l)}
    U_plus = A + B.conj()
    U_minus = A - B.conj()
    J_q = np.block([[U_plus.real, -U_plus.imag],
                    [U_minus.imag, U_minus.real]])
    J_a = np.block([[R, S], [S.conj(), R.conj()]])
    return BlockJacobian(K=K, R=R, S=S, J_a=J_a, U_plus=U_plus,
                         U_minus=U_minus, J_q=J_q, pair_rotation=phis)


def three_mode_rates(state: CombState,
                     floor: float = AMPLITUDE_FLOOR) -> tuple[float, float]:
    """Exact amplitude/phase relaxation rates of a three-mode comb.

    For a roll whose only excited modes are 0 and +/-L,
        kappa_a = -g0 |A_0|^2 sin(2 phi_0 - 2 Phi_L),
        kappa_p =  g0 (|A_L|^2 + |A_0|^2 cos(2 phi_0 - 2 Phi_L)),
    with phi_0 the pump-mode phase and Phi_L the pair phase.
    """
    _gate(state)
    if state.pattern is not PatternKind.ROLL or state.roll_order is None:
        raise ValueError("three-mode rates are defined for roll states only")
    a = state.amplitudes
    K, L = state.K, state.roll_order
    I = np.abs(a) ** 2
    excited = np.flatnonzero(I > floor * I.max()) - K
    if not set(excited.tolist()) <= {-L, 0, L}:
        raise ValueError(
            f"state excites modes {sorted(excited.tolist())} above the "
            f"floor; the exact rates hold only for the three-mode comb "
            f"{{-{L}, 0, {L}}} (truncate at K < 2L or raise the floor)")
    g0 = state.params.g0
    phi0 = float(np.angle(a[K]))
    Phi_L = 0.5 * (np.angle(a[K + L]) + np.angle(a[K - L]))
    delta = 2.0 * phi0 - 2.0 * Phi_L
    kappa_a = -g0 * I[K] * math.sin(delta)
    kappa_p = g0 * (I[K + L] + I[K] * math.cos(delta))
    return float(kappa_a), float(kappa_p)


def matrix_csv(M: np.ndarray, name: str) -> str:
    """Row-major dump with interleaved Re/Im columns for external checks."""
    M = np.atleast_2d(M)
    header = f"# {name}: {M.shape[0]}x{M.shape[1]}, columns re_0,im_0,re_1,im_1,..."
    lines = [header]
    for row in M:
        cells = []
        for v in row:
            cells.append(f"{v.real:.12e}")
            cells.append(f"{complex(v).imag:.12e}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
