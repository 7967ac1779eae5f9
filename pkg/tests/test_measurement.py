import numpy as np
import pytest

import nlochar as nl
from nlochar.errors import InvalidDimensionError, InvalidSettingError
from nlochar.measurement import MeasurementSetting, SampleSet, substream_rng


def test_probe_sequence_single_mode():
    probes = nl.probe_sequence(1, 7.0)
    assert len(probes) == 2
    assert np.array_equal(probes[0].mean, [7.0, 0.0])
    assert np.array_equal(probes[1].mean, [0.0, 7.0])


def test_probe_sequence_sixteen_modes():
    probes = nl.probe_sequence(16, 10.0)
    assert len(probes) == 32
    for n, probe in enumerate(probes):
        assert np.array_equal(probe.cov, np.eye(32))
        expected = np.zeros(32)
        expected[n] = 10.0
        assert np.array_equal(probe.mean, expected)


def test_probe_sequence_rejects_nonpositive_amplitude():
    with pytest.raises(ValueError):
        nl.probe_sequence(2, 0.0)


def test_setting_catalog_counts():
    assert len(nl.setting_catalog(1)) == 3
    assert len(nl.setting_catalog(2)) == 10
    assert len(nl.setting_catalog(16)) == 528
    for modes in (1, 2, 3, 16):
        expected = 2 * modes + modes * (modes - 1) + modes * modes
        assert len(nl.setting_catalog(modes)) == expected


def test_setting_catalog_labels_unique_and_directions_valid():
    settings = nl.setting_catalog(3)
    labels = [s.label for s in settings]
    assert len(set(labels)) == len(labels)
    for s in settings:
        nonzero = np.flatnonzero(s.direction)
        assert len(nonzero) in (1, 2)
        assert np.all(s.direction[nonzero] == 1.0)


def test_setting_catalog_spans_symmetric_matrices():
    for modes in (2, 3):
        dim = 2 * modes
        rows = []
        for s in nl.setting_catalog(modes):
            outer = np.outer(s.direction, s.direction)
            iu = np.triu_indices(dim)
            rows.append(outer[iu])
        rank = np.linalg.matrix_rank(np.array(rows))
        assert rank == dim * (dim + 1) // 2


def test_sample_quadrature_reproducible():
    st = nl.vacuum_state(2)
    a = nl.sample_quadrature(st, [1.0, 0.0, 0.0, 0.0], 100, 42)
    b = nl.sample_quadrature(st, [1.0, 0.0, 0.0, 0.0], 100, 42)
    assert np.array_equal(a.samples, b.samples)


def test_sample_quadrature_vacuum_statistics():
    n = 100_000
    s = nl.sample_quadrature(nl.vacuum_state(1), [1.0, 0.0], n, 7)
    assert abs(np.mean(s.samples)) < 5.0 / np.sqrt(n)
    assert abs(s.variance() - 1.0) < 5.0 * np.sqrt(2.0 / (n - 1))


def test_sample_quadrature_coherent_mean():
    s = nl.sample_quadrature(nl.coherent_state([3.0, 0.0]), [1.0, 0.0], 50_000, 3)
    assert abs(np.mean(s.samples) - 3.0) < 0.05


def test_sample_quadrature_two_mode_squeezed_sum_variance():
    out = nl.apply_channel(nl.two_mode_squeezer(0.5, 0, 1, 2), nl.vacuum_state(2))
    s = nl.sample_quadrature(out, [1.0, 1.0, 0.0, 0.0], 100_000, 5)
    expected = 2.0 * np.exp(1.0)  # 2*(cosh 1 + sinh 1)
    assert abs(expected - 5.43656365691809) < 1e-10
    assert abs(s.variance() - expected) < 5.0 * expected * np.sqrt(2.0 / 99_999)


def test_sample_quadrature_rejects_zero_direction():
    with pytest.raises(InvalidSettingError):
        nl.sample_quadrature(nl.vacuum_state(1), [0.0, 0.0], 10, 0)


def test_sample_variance_convergence_rate():
    # variance-of-variance band: |s^2 - sigma^2| within 3 sigma^2 sqrt(2/(n-1))
    out = nl.apply_channel(nl.two_mode_squeezer(0.4, 0, 1, 2), nl.vacuum_state(2))
    n = 10_000
    band = 3.0 * np.sqrt(2.0 / (n - 1))
    misses = 0
    for k, setting in enumerate(nl.setting_catalog(2)):
        sigma2 = setting.direction @ out.cov @ setting.direction
        s = nl.sample_quadrature(out, setting, n, substream_rng(99, k))
        if abs(s.variance() - sigma2) > band * sigma2:
            misses += 1
    assert misses <= 1  # 3-sigma outliers are rare but legal


def test_measure_output_means_identity_high_shots():
    records = nl.measure_output_means(
        nl.identity_channel(1), nl.probe_sequence(1, 10.0), 200_000, 12
    )
    assert abs(records[0].measured_output_mean[0] - 10.0) < 0.02
    assert abs(records[0].measured_output_mean[1]) < 0.02
    assert records[0].probe_index == 1
    assert records[1].probe_index == 2


def test_measure_output_means_standard_error_scaling():
    # empirical std of repeated shot-averaged means ~ sqrt(V/shots) = 0.01
    shots = 10_000
    deviations = []
    ch = nl.identity_channel(1)
    probes = nl.probe_sequence(1, 10.0)
    for seed in range(100):
        rec = nl.measure_output_means(ch, probes, shots, seed)[0]
        deviations.append(rec.measured_output_mean[0] - 10.0)
    observed = np.std(deviations)
    assert 0.006 < observed < 0.014


def test_measure_output_means_amplifier_response_pattern():
    r = 0.5
    ch = nl.dfg_array(nl.DfgSpec(2, r))
    probes = nl.probe_sequence(2, 10.0)
    records = nl.measure_output_means(ch, probes, 100_000, 8)
    response = records[0].measured_output_mean  # probe along x0
    tol = 5.0 * np.sqrt(np.cosh(2 * r) / 100_000)
    assert abs(response[0] - 10.0 * np.cosh(r)) < tol
    assert abs(response[1] - 10.0 * np.sinh(r)) < tol
    assert abs(response[2]) < tol
    assert abs(response[3]) < tol


def test_measure_output_means_reproducible_and_streams_independent():
    ch = nl.two_mode_squeezer(0.3, 0, 1, 2)
    probes = nl.probe_sequence(2, 10.0)
    a = nl.measure_output_means(ch, probes, 50, 4)
    b = nl.measure_output_means(ch, probes, 50, 4)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.measured_output_mean, rb.measured_output_mean)
    c = nl.measure_output_means(ch, probes, 50, 5)
    assert not np.array_equal(a[0].measured_output_mean, c[0].measured_output_mean)


def test_measure_vacuum_response_has_index_zero():
    rec = nl.measure_vacuum_response(nl.identity_channel(2), 1000, 2)
    assert rec.probe_index == 0
    assert np.array_equal(rec.input_mean, np.zeros(4))


def test_vacuum_stage_samples_cover_catalog():
    sets = nl.vacuum_stage_samples(nl.identity_channel(2), 100, 6)
    labels = {s.setting.label for s in sets}
    assert labels == {s.label for s in nl.setting_catalog(2)}
    again = nl.vacuum_stage_samples(nl.identity_channel(2), 100, 6)
    for a, b in zip(sets, again):
        assert np.array_equal(a.samples, b.samples)


def test_sample_set_requires_two_samples():
    setting = nl.setting_catalog(1)[0]
    with pytest.raises(ValueError):
        SampleSet(setting, np.array([1.0]))


def test_direction_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        nl.sample_quadrature(nl.vacuum_state(2), [1.0, 0.0], 10, 0)


def test_catalog_setting_validation():
    with pytest.raises(InvalidSettingError):
        MeasurementSetting(np.array([0.5, 0.0]), "bad", "x")
    with pytest.raises(InvalidSettingError):
        MeasurementSetting(np.array([1.0, 1.0, 1.0, 0.0]), "bad", "xx")
