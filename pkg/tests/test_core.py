import numpy as np
import pytest

import nlochar as nl
from nlochar.channels import random_physical_channel, random_physical_covariance, random_symplectic
from nlochar.errors import DegenerateMatrixError, InvalidDimensionError, InvalidPartitionError


def test_omega_single_mode():
    assert np.array_equal(nl.omega(1), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_omega_two_modes_block_structure():
    om = nl.omega(2)
    assert np.array_equal(om[:2, 2:], np.eye(2))
    assert np.array_equal(om[2:, :2], -np.eye(2))
    assert np.array_equal(om[:2, :2], np.zeros((2, 2)))


def test_omega_squares_to_minus_identity():
    om = nl.omega(3)
    assert np.array_equal(om @ om, -np.eye(6))


def test_omega_rejects_zero_modes():
    with pytest.raises(InvalidDimensionError):
        nl.omega(0)


def test_identity_channel_preserves_vacuum():
    out = nl.apply_channel(nl.identity_channel(3), nl.vacuum_state(3))
    assert np.array_equal(out.mean, np.zeros(6))
    assert np.array_equal(out.cov, np.eye(6))


def test_pure_loss_on_coherent_state():
    loss = nl.loss_channel(nl.LossSpec((0.5,)))
    out = nl.apply_channel(loss, nl.coherent_state([2.0, 0.0]))
    assert np.allclose(out.mean, [np.sqrt(2.0), 0.0], atol=1e-12)
    assert np.allclose(out.cov, np.eye(2), atol=1e-12)


def test_apply_channel_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        nl.apply_channel(nl.identity_channel(2), nl.vacuum_state(3))


def test_compose_losses_multiply_transmissivities():
    # substituting into the composition formula must match the direct constructor
    first = nl.loss_channel(nl.LossSpec((0.5,)))
    second = nl.loss_channel(nl.LossSpec((0.6,)))
    combined = nl.compose(second, first)
    direct = nl.loss_channel(nl.LossSpec((0.3,)))
    assert np.allclose(combined.amp, direct.amp, atol=1e-12)
    assert np.allclose(combined.noise, direct.noise, atol=1e-12)
    assert np.allclose(combined.amp, np.sqrt(0.3) * np.eye(2), atol=1e-12)
    assert np.allclose(combined.noise, 0.7 * np.eye(2), atol=1e-12)


def test_compose_with_identity_is_no_op():
    ch = nl.two_mode_squeezer(0.4, 0, 1, 2)
    for composed in (nl.compose(ch, nl.identity_channel(2)), nl.compose(nl.identity_channel(2), ch)):
        assert np.allclose(composed.amp, ch.amp, atol=1e-14)
        assert np.allclose(composed.noise, ch.noise, atol=1e-14)
        assert np.allclose(composed.disp, ch.disp, atol=1e-14)


def test_compose_is_associative():
    rng = np.random.default_rng(42)
    c1, c2, c3 = (random_physical_channel(2, rng) for _ in range(3))
    left = nl.compose(nl.compose(c3, c2), c1)
    right = nl.compose(c3, nl.compose(c2, c1))
    assert np.max(np.abs(left.amp - right.amp)) < 1e-10
    assert np.max(np.abs(left.noise - right.noise)) < 1e-10
    assert np.max(np.abs(left.disp - right.disp)) < 1e-10


def test_compose_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        nl.compose(nl.identity_channel(1), nl.identity_channel(2))


def test_margin_zero_for_symplectic_noiseless():
    ch = nl.two_mode_squeezer(0.7, 0, 1, 2)
    assert abs(nl.physicality_margin(ch)) < 1e-10


def test_margin_of_pure_loss_matches_direct_eigensolve():
    ch = nl.loss_channel(nl.LossSpec((0.3,)))
    # independent decomposition of 0.7*I + 0.7*i*Omega: eigenvalues 0.7*(1 +- 1)
    herm = 0.7 * np.eye(2) + 0.7j * np.array([[0.0, 1.0], [-1.0, 0.0]])
    expected = np.linalg.eigvalsh(herm)
    assert np.allclose(expected, [0.0, 1.4], atol=1e-12)
    assert abs(nl.physicality_margin(ch) - expected[0]) < 1e-12


def test_margin_detects_negative_noise():
    ch = nl.GaussianChannel(np.eye(2), -0.1 * np.eye(2), np.zeros(2))
    assert abs(nl.physicality_margin(ch) - (-0.1)) < 1e-12


def test_state_physicality_thresholds():
    assert abs(nl.state_physicality(np.eye(2))) < 1e-12
    assert abs(nl.state_physicality(2.0 * np.eye(2)) - 1.0) < 1e-12
    assert abs(nl.state_physicality(0.5 * np.eye(2)) - (-0.5)) < 1e-12


def test_amp_matrix_identity_pair():
    pair = nl.ComplexChannelPair(np.eye(2), np.zeros((2, 2)))
    assert np.array_equal(nl.to_amp_matrix(pair), np.eye(4))
    back = nl.from_amp_matrix(np.eye(4))
    assert np.allclose(back.g, np.eye(2), atol=1e-14)
    assert np.allclose(back.h, np.zeros((2, 2)), atol=1e-14)


def test_amp_matrix_pure_phase_conjugator():
    pair = nl.ComplexChannelPair(np.zeros((2, 2)), np.eye(2))
    amp = nl.to_amp_matrix(pair)
    expected = np.block(
        [[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), -np.eye(2)]]
    )
    assert np.array_equal(amp, expected)


def test_amp_matrix_round_trip_random():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = rng.normal(size=(8, 8))
        back = nl.to_amp_matrix(nl.from_amp_matrix(a))
        assert np.max(np.abs(back - a)) < 1e-12


def test_amplifier_signature_maps_to_conjugation_block():
    # opposite x/p off-diagonal signs land in H, leaving G diagonal
    amp = nl.two_mode_squeezer(0.4, 0, 1, 2).amp
    pair = nl.from_amp_matrix(amp)
    assert abs(pair.g[0, 1]) < 1e-14
    assert abs(pair.g[1, 0]) < 1e-14
    assert abs(pair.h[0, 1] - np.sinh(0.4)) < 1e-14
    assert np.allclose(pair.g, np.cosh(0.4) * np.eye(2), atol=1e-14)


def test_from_amp_matrix_rejects_odd_dimension():
    with pytest.raises(InvalidDimensionError):
        nl.from_amp_matrix(np.eye(3))


def test_vacuum_and_coherent_states():
    vac = nl.vacuum_state(1)
    assert np.array_equal(vac.mean, np.zeros(2))
    assert np.array_equal(vac.cov, np.eye(2))
    assert abs(nl.state_physicality(vac.cov)) < 1e-12
    coh = nl.coherent_state([3.0, 4.0])
    assert np.array_equal(coh.mean, [3.0, 4.0])
    assert np.array_equal(coh.cov, np.eye(2))


def test_symplectic_eigenvalues_basics():
    assert np.allclose(nl.symplectic_eigenvalues(np.eye(6)), np.ones(3), atol=1e-12)
    assert np.allclose(nl.symplectic_eigenvalues(2.0 * np.eye(2)), [2.0], atol=1e-12)


def test_symplectic_eigenvalues_of_pure_state_are_one():
    # purity oracle: the two-mode squeezed vacuum from the Fock simulator
    from nlochar.fock import build_two_mode_squeezer_state, quadrature_moments

    _, cov = quadrature_moments(build_two_mode_squeezer_state(0.5, 40))
    assert np.allclose(nl.symplectic_eigenvalues(cov), [1.0, 1.0], atol=1e-6)


def test_symplectic_eigenvalues_reject_non_positive_definite():
    with pytest.raises(DegenerateMatrixError):
        nl.symplectic_eigenvalues(np.diag([1.0, -0.5]))


def test_ppt_vacuum_is_zero():
    assert abs(nl.ppt_min_eigenvalue(np.eye(4), [0])) < 1e-12


def test_ppt_two_mode_squeezed_vacuum_analytic():
    for r in (0.1, 0.2305, 0.5):
        out = nl.apply_channel(nl.two_mode_squeezer(r, 0, 1, 2), nl.vacuum_state(2))
        value = nl.ppt_min_eigenvalue(out.cov, [1])
        assert abs(value - np.expm1(-2.0 * r)) < 1e-10
    out = nl.apply_channel(nl.two_mode_squeezer(0.2305, 0, 1, 2), nl.vacuum_state(2))
    assert abs(nl.ppt_min_eigenvalue(out.cov, [1]) - (-0.3693)) < 2e-4


def test_ppt_product_of_thermal_states_non_negative():
    assert nl.ppt_min_eigenvalue(np.diag([2.0, 2.0, 2.0, 2.0]), [0]) >= -1e-12


def test_ppt_rejects_trivial_partitions():
    with pytest.raises(InvalidPartitionError):
        nl.ppt_min_eigenvalue(np.eye(4), [])
    with pytest.raises(InvalidPartitionError):
        nl.ppt_min_eigenvalue(np.eye(4), [0, 1])
    with pytest.raises(InvalidPartitionError):
        nl.ppt_min_eigenvalue(np.eye(4), [5])


def test_ppt_complement_invariance():
    rng = np.random.default_rng(11)
    for _ in range(10):
        cov = random_physical_covariance(3, rng)
        a = nl.ppt_min_eigenvalue(cov, [0])
        b = nl.ppt_min_eigenvalue(cov, [1, 2])
        assert abs(a - b) < 1e-10


def test_apply_channel_output_covariance_is_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ch = random_physical_channel(2, rng)
        st = nl.GaussianState(rng.normal(size=4), random_physical_covariance(2, rng))
        out = nl.apply_channel(ch, st)
        assert np.array_equal(out.cov, out.cov.T)


def test_physical_channels_preserve_physical_states():
    rng = np.random.default_rng(17)
    for _ in range(200):
        modes = int(rng.integers(1, 4))
        ch = random_physical_channel(modes, rng)
        assert nl.physicality_margin(ch) >= -1e-9
        st = nl.GaussianState(
            rng.normal(size=2 * modes), random_physical_covariance(modes, rng)
        )
        out = nl.apply_channel(ch, st)
        assert nl.state_physicality(out.cov) >= -1e-9


def test_channel_margin_is_more_stringent_than_vacuum_output():
    rng = np.random.default_rng(23)
    for _ in range(50):
        modes = int(rng.integers(1, 4))
        dim = 2 * modes
        amp = rng.normal(scale=0.8, size=(dim, dim))
        raw = rng.normal(scale=0.5, size=(dim, dim))
        noise = (raw + raw.T) / 2.0
        ch = nl.GaussianChannel(amp, noise, np.zeros(dim))
        vacuum_margin = nl.state_physicality(
            (amp @ amp.T + noise + (amp @ amp.T + noise).T) / 2.0
        )
        assert nl.physicality_margin(ch) <= vacuum_margin + 1e-10


def test_symplectic_channel_preserves_symplectic_spectrum():
    rng = np.random.default_rng(31)
    for _ in range(10):
        amp = random_symplectic(2, rng)
        ch = nl.GaussianChannel(amp, np.zeros((4, 4)), np.zeros(4))
        assert abs(nl.physicality_margin(ch)) < 1e-10
        cov = random_physical_covariance(2, rng)
        st = nl.GaussianState(np.zeros(4), cov)
        out = nl.apply_channel(ch, st)
        before = nl.symplectic_eigenvalues(cov)
        after = nl.symplectic_eigenvalues(out.cov)
        assert np.max(np.abs(before - after)) < 1e-8


def test_reduced_covariance_extracts_pair_block():
    ch = nl.two_mode_squeezer(0.3, 0, 2, 3)
    out = nl.apply_channel(ch, nl.vacuum_state(3))
    pair = nl.reduced_covariance(out.cov, [0, 2])
    direct = nl.apply_channel(nl.two_mode_squeezer(0.3, 0, 1, 2), nl.vacuum_state(2))
    assert np.allclose(pair, direct.cov, atol=1e-12)
    assert abs(nl.ppt_min_eigenvalue(pair, [1]) - np.expm1(-0.6)) < 1e-10


def test_covariance_symmetry_validation():
    bad = np.eye(4)
    bad[0, 1] = 1e-6
    with pytest.raises(ValueError):
        nl.GaussianState(np.zeros(4), bad)


def test_state_dimension_validation():
    with pytest.raises(InvalidDimensionError):
        nl.GaussianState(np.zeros(3), np.eye(3))
    with pytest.raises(InvalidDimensionError):
        nl.GaussianState(np.zeros(4), np.eye(6))
