"""Linearized fluctuation flow: block Jacobians, stability, pair frames."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrcomb import _modal
from kerrcomb import linearization as lin
from kerrcomb import steady_state as ss
from kerrcomb import units

from conftest import make_flat


def _flat_state(g_over, sigma_over, zeta2_over, K=6, rho=0.5):
    branches, name = make_flat(g_over, sigma_over, zeta2_over, rho=rho)
    a = np.zeros(2 * K + 1, dtype=complex)
    a[K] = getattr(branches, name)
    return ss.CombState(a, branches.params,
                        ss.residual(a, branches.params), ss.PatternKind.FLAT)


def _random_state(seed, K=5):
    """A non-stationary field with the residual gate bypassed (for FD checks
    of the Jacobian itself, which is defined for any field)."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    params = units.ModalParams(kappa=1.0, kappa_t=0.5, sigma=-0.7,
                               zeta2=0.013, g0=0.05, A_in=1.3, rho=0.5)
    return a, params


class TestModalJacobian:
    def test_zero_kerr_is_diagonal(self):
        params = units.ModalParams(kappa=1.0, kappa_t=0.5, sigma=0.4,
                                   zeta2=0.02, g0=0.0, A_in=1.0, rho=0.5)
        a = np.zeros(9, dtype=complex)
        a[4] = math.sqrt(2.0 * params.kappa_t) * params.A_in / (
            params.kappa - 1j * params.sigma)
        state = ss.CombState(a, params, ss.residual(a, params))
        blk = lin.build_modal_jacobian(state)
        l = np.arange(-4, 5)
        expected = -params.kappa + 1j * (params.sigma - params.zeta2 * l**2 / 2)
        np.testing.assert_allclose(np.diag(blk.R), expected, atol=1e-15)
        assert np.max(np.abs(blk.R - np.diag(np.diag(blk.R)))) == 0.0
        assert np.max(np.abs(blk.S)) == 0.0

    def test_S_is_symmetric(self, roll20):
        state, _ = roll20
        blk = lin.build_modal_jacobian(state)
        np.testing.assert_allclose(blk.S, blk.S.T, atol=1e-18)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_finite_difference_oracle(self, seed):
        # dF = R da + S da* for the full nonlinear vector field
        a, params = _random_state(seed)
        R, S = _modal.build_RS(a, params)
        F0 = _modal.vector_field(a, params)
        rng = np.random.default_rng(seed + 1)
        da = 1e-7 * (rng.standard_normal(len(a))
                     + 1j * rng.standard_normal(len(a)))
        F1 = _modal.vector_field(a + da, params)
        predicted = R @ da + S @ da.conj()
        np.testing.assert_allclose(F1 - F0, predicted,
                                   atol=1e-6 * np.max(np.abs(F0)))

    def test_residual_gate_refuses_sloppy_state(self):
        a, params = _random_state(3)
        state = ss.CombState(a, params, ss.residual(a, params))
        assert state.residual_norm > lin.RESIDUAL_GATE
        with pytest.raises(ValueError):
            lin.build_modal_jacobian(state)

    def test_eigenvalues_in_conjugate_pairs(self, roll20):
        # J_a commutes with the swap-conjugate symmetry, so its spectrum
        # is closed under complex conjugation
        state, _ = roll20
        eig = lin.stability_spectrum(lin.build_modal_jacobian(state).J_a)
        tol = 1e-7 * float(np.max(np.abs(eig)))
        dist = np.min(np.abs(eig[:, None] - eig.conj()[None, :]), axis=1)
        assert float(dist.max()) < tol

    def test_gauge_invariance_of_spectrum(self, roll20):
        # rigid rotation of the pattern must not move the eigenvalues
        state, _ = roll20
        a_rot = state.amplitudes * np.exp(1j * state.mode_numbers * 0.42)
        rotated = ss.CombState(a_rot, state.params, state.residual_norm,
                               state.pattern, state.roll_order)
        e0 = np.sort(lin.stability_spectrum(
            lin.build_modal_jacobian(state).J_a).real)
        e1 = np.sort(lin.stability_spectrum(
            lin.build_modal_jacobian(rotated).J_a).real)
        np.testing.assert_allclose(e0, e1, atol=1e-8)


class TestFlatPairReduction:
    def test_two_by_two_blocks(self):
        # around the flat state each +/-l pair decouples; the quadrature
        # Jacobian must be block-diagonal with the analytic 2x2 blocks
        state = _flat_state(0.4, -0.8, 0.015, K=6)
        state = ss.rotate_to_symmetric(state)
        blk = lin.build_quadrature_jacobian(state)
        p = state.params
        A0 = state.amplitudes[state.K]
        g = p.g0 * abs(A0) ** 2
        # undefined pair frames default to Phi_l = 0, so the analytic block
        # carries the pump phase:  c = i g0 A0*^2
        c = 1j * p.g0 * A0.conjugate() ** 2
        K = blk.K
        for i, l in enumerate(range(1, K + 1)):
            xi = p.sigma - p.zeta2 * l**2 / 2.0 + 2.0 * g
            sub = np.array([[blk.J_q[i, i], blk.J_q[i, K + i]],
                            [blk.J_q[K + i, i], blk.J_q[K + i, K + i]]])
            assert sub[0, 0] == pytest.approx(-p.kappa + c.real, abs=1e-12)
            assert sub[1, 1] == pytest.approx(-p.kappa - c.real, abs=1e-12)
            assert sub[0, 1] == pytest.approx(-xi - c.imag, abs=1e-12)
            assert sub[1, 0] == pytest.approx(xi - c.imag, abs=1e-12)
        # off-block entries vanish
        mask = np.ones_like(blk.J_q, dtype=bool)
        for i in range(K):
            for r, c in ((i, i), (i, K + i), (K + i, i), (K + i, K + i)):
                mask[r, c] = False
        assert np.max(np.abs(blk.J_q[mask])) < 1e-14

    def test_pair_eigenvalues_match_lineshape_roots(self):
        # eigenvalues of each 2x2 block are -kappa +/- sqrt(g^2 - xi^2)
        state = _flat_state(0.3, 0.5, 0.01, K=4)
        blk = lin.build_quadrature_jacobian(state)
        p = state.params
        g = p.g0 * abs(state.amplitudes[state.K]) ** 2
        K = blk.K
        for i, l in enumerate(range(1, K + 1)):
            xi = p.sigma - p.zeta2 * l**2 / 2.0 + 2.0 * g
            sub = np.array([[blk.J_q[i, i], blk.J_q[i, K + i]],
                            [blk.J_q[K + i, i], blk.J_q[K + i, K + i]]])
            eig = np.linalg.eigvals(sub.astype(complex))
            root = complex(np.emath.sqrt(g**2 - xi**2))
            expected = np.array([-p.kappa + root, -p.kappa - root])
            eig = eig[np.lexsort((eig.real, eig.imag))]
            expected = expected[np.lexsort((expected.real, expected.imag))]
            np.testing.assert_allclose(eig, expected, atol=1e-10)


class TestQuadratureJacobian:
    def test_requires_symmetric_state(self, roll20):
        state, _ = roll20
        a_rot = state.amplitudes * np.exp(1j * state.mode_numbers * 0.3)
        rotated = ss.CombState(a_rot, state.params, state.residual_norm,
                               state.pattern, state.roll_order)
        with pytest.raises(ValueError):
            lin.build_quadrature_jacobian(rotated)

    def test_difference_coordinates_close(self, three_mode):
        # J_q must reproduce the modal flow restricted to D_l = da_l - da_{-l}
        state, _ = three_mode
        blk = lin.build_quadrature_jacobian(state)
        K = blk.K
        rng = np.random.default_rng(11)
        D = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        # map pair quadratures -> full modal perturbation (antisymmetric)
        phis = blk.pair_rotation
        da = np.zeros(2 * K + 1, dtype=complex)
        Dm = D * np.exp(1j * phis)         # undo the pair pre-rotation
        da[K + 1:] = Dm / 2.0
        da[:K] = (-Dm / 2.0)[::-1]
        dF = blk.R @ da + blk.S @ da.conj()
        # pull the difference components back into the rotated pair frame
        dD = (dF[K + 1:] - dF[:K][::-1]) * np.exp(-1j * phis)
        x = np.concatenate([D.real, D.imag])
        out = blk.J_q @ x
        np.testing.assert_allclose(out[:K] + 1j * out[K:], dD, atol=1e-10)

    def test_pair_phase_rotation_invariance(self, three_mode):
        # the half-sum phase (arg A_l + arg A_{-l})/2 is invariant under
        # rigid rotation (the +/-l contributions cancel), modulo pi from
        # branch wrapping of the individual angles
        state, _ = three_mode
        theta = 0.1
        a_rot = state.amplitudes * np.exp(1j * state.mode_numbers * theta)
        rotated = ss.CombState(a_rot, state.params, state.residual_norm,
                               state.pattern, state.roll_order)
        for p0, p1 in zip(lin.pair_phases(state), lin.pair_phases(rotated)):
            if not p0.defined:
                assert not p1.defined
                continue
            d = math.remainder(p1.Phi_l - p0.Phi_l, math.pi)
            assert d == pytest.approx(0.0, abs=1e-9)

    def test_undefined_pairs_flagged(self):
        state = _flat_state(0.2, 0.0, 0.01, K=3)
        phases = lin.pair_phases(state)
        assert all(not p.defined for p in phases)
        assert all(p.Phi_l == 0.0 for p in phases)


class TestThreeModeRates:
    def test_rejects_non_roll(self, bright_soliton):
        state, _ = bright_soliton
        with pytest.raises(ValueError):
            lin.three_mode_rates(state)

    def test_rejects_harmonic_content(self, roll20):
        # the broadband Roll(20) carries harmonics at +/-40, +/-60, ...
        state, _ = roll20
        with pytest.raises(ValueError):
            lin.three_mode_rates(state)

    def test_near_threshold_rates(self, three_mode):
        state, _ = three_mode
        kappa_a, kappa_p = lin.three_mode_rates(state, floor=1e-10)
        p = state.params
        # just above threshold the amplitude decay rate locks to kappa and
        # the phase rate collapses toward zero (free-running comb phase)
        assert kappa_a == pytest.approx(p.kappa, rel=1e-9)
        assert abs(kappa_p) < 0.1 * p.kappa


class TestStability:
    def test_all_reference_states_stable(self, roll20, three_mode,
                                         bright_soliton, dark_soliton):
        for state, _ in (roll20, three_mode, bright_soliton, dark_soliton):
            blk = lin.build_modal_jacobian(state)
            assert lin.is_stable(blk.J_a, state.params.kappa)

    def test_flat_above_threshold_unstable(self):
        # g > kappa with xi band crossing zero: flat state is MI-unstable
        branches, name = make_flat(1.5, -3.0, 0.02)
        a = np.zeros(81, dtype=complex)
        a[40] = getattr(branches, name)
        state = ss.CombState(a, branches.params,
                             ss.residual(a, branches.params))
        blk = lin.build_modal_jacobian(state)
        assert not lin.is_stable(blk.J_a, branches.params.kappa)


class TestMatrixCsv:
    def test_roundtrip_digits(self):
        M = np.array([[1.0 + 2.0j, -3.123456789012345e-7]])
        text = lin.matrix_csv(M, "demo")
        lines = text.strip().splitlines()
        assert lines[0].startswith("# demo: 1x2")
        vals = [float(v) for v in lines[1].split(",")]
        assert vals == pytest.approx([1.0, 2.0, -3.123456789012345e-7, 0.0],
                                     rel=1e-12)
