"""Probe sequences and shot-limited measurement simulation.

Two measurement stages are simulated. The coherent-probe stage injects
one strongly displaced probe per quadrature axis and records the
shot-averaged output mean vector. The vacuum stage draws homodyne
samples of the output state along each direction of the setting
catalog; a Gaussian state yields normally distributed outcomes with
mean w.q and variance w^T V w.

All randomness is derived from a master seed through per-task
substreams keyed by (seed, stage, indices), so results are independent
of evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from .core import GaussianState, GaussianChannel, apply_channel, coherent_state, vacuum_state
from .errors import InvalidDimensionError, InvalidSettingError

# Substream tags keeping the measurement stages statistically disjoint.
_STAGE_MEAN = 0
_STAGE_VACUUM = 1
_STAGE_EIGENPROBE = 2


def substream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one unit of work under a master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


@dataclass(frozen=True)
class MeasurementSetting:
    """Quadrature direction with a human-readable label.

    ``direction`` has one or two unit entries selecting x_i, p_i,
    x_i+x_j, p_i+p_j, or x_i+p_j (unnormalized sums, so covariance
    combinations need no renormalization).
    """

    direction: np.ndarray
    label: str
    kind: str

    def __post_init__(self):
        w = np.asarray(self.direction, dtype=float).copy()
        if w.ndim != 1 or w.size % 2 != 0:
            raise InvalidSettingError(f"direction must have even length, got {w.shape}")
        nonzero = np.flatnonzero(w)
        if len(nonzero) == 0:
            raise InvalidSettingError("direction must be a nonzero vector")
        if self.kind != "custom" and (
            len(nonzero) not in (1, 2) or not np.all(w[nonzero] == 1.0)
        ):
            raise InvalidSettingError(
                f"catalog direction must have one or two unit entries, got {w}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "direction", w)


@dataclass(frozen=True)
class SampleSet:
    """Homodyne samples drawn along one measurement setting."""

    setting: MeasurementSetting
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).copy()
        if s.ndim != 1 or s.size < 2:
            raise ValueError(f"need at least 2 samples, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def shots(self) -> int:
        return self.samples.size

    def variance(self) -> float:
        """Unbiased sample variance."""
        return float(np.var(self.samples, ddof=1))


@dataclass(frozen=True)
class ProbeRecord:
    """Shot-averaged output mean for one probe input.

    ``probe_index`` is 1-based (probe n excites quadrature axis n); index
    0 marks the zero-input (vacuum) record used for the displacement.
    """

    input_mean: np.ndarray
    probe_index: int
    measured_output_mean: np.ndarray
    shots_per_quadrature: int

    def __post_init__(self):
        inp = np.asarray(self.input_mean, dtype=float).copy()
        out = np.asarray(self.measured_output_mean, dtype=float).copy()
        if inp.shape != out.shape or inp.ndim != 1:
            raise InvalidDimensionError(
                f"input and output means must be equal-length vectors, got {inp.shape}, {out.shape}"
            )
        if self.shots_per_quadrature < 1:
            raise ValueError("shots_per_quadrature must be >= 1")
        if self.probe_index < 0:
            raise ValueError("probe_index must be >= 0 (0 marks the vacuum record)")
        inp.setflags(write=False)
        out.setflags(write=False)
        object.__setattr__(self, "input_mean", inp)
        object.__setattr__(self, "measured_output_mean", out)


def probe_sequence(modes: int, q_amplitude: float) -> list[GaussianState]:
    """Coherent probes q * e_n for n = 1..2M, each with vacuum noise."""
    if q_amplitude <= 0.0:
        raise ValueError(f"probe amplitude must be positive, got {q_amplitude}")
    states = []
    for n in range(2 * modes):
        mean = np.zeros(2 * modes)
        mean[n] = q_amplitude
        states.append(coherent_state(mean))
    return states


def setting_catalog(modes: int) -> list[MeasurementSetting]:
    """All single and pairwise quadrature settings for M modes.

    Enumerates x_i, p_i (i = 0..M-1), x_i+x_j and p_i+p_j (i < j), and
    x_i+p_j for all i, j including i = j; 2M + M(M-1) + M^2 settings in
    total, enough to reconstruct every covariance entry.
    """
    if modes < 1:
        raise InvalidDimensionError(f"modes must be >= 1, got {modes}")
    dim = 2 * modes

    def unit(*positions):
        w = np.zeros(dim)
        w[list(positions)] = 1.0
        return w

    settings = []
    for i in range(modes):
        settings.append(MeasurementSetting(unit(i), f"x{i}", "x"))
    for i in range(modes):
        settings.append(MeasurementSetting(unit(modes + i), f"p{i}", "p"))
    for i in range(modes):
        for j in range(i + 1, modes):
            settings.append(MeasurementSetting(unit(i, j), f"x{i}+x{j}", "xx"))
    for i in range(modes):
        for j in range(i + 1, modes):
            settings.append(
                MeasurementSetting(unit(modes + i, modes + j), f"p{i}+p{j}", "pp")
            )
    for i in range(modes):
        for j in range(modes):
            settings.append(
                MeasurementSetting(unit(i, modes + j), f"x{i}+p{j}", "xp")
            )
    return settings


def sample_quadrature(state: GaussianState, direction, shots: int, seed) -> SampleSet:
    """Draw homodyne samples of a Gaussian state along a direction.

    Outcomes are i.i.d. normal with mean w.q and variance w^T V w;
    identical seeds give identical samples.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if isinstance(direction, MeasurementSetting):
        setting = direction
    else:
        setting = MeasurementSetting(np.asarray(direction, dtype=float), "custom", "custom")
    vec = setting.direction
    if vec.size != 2 * state.modes:
        raise InvalidDimensionError(
            f"direction length {vec.size} does not match state dimension {2 * state.modes}"
        )
    mean = float(vec @ state.mean)
    variance = float(vec @ state.cov @ vec)
    rng = np.random.default_rng(seed)
    samples = rng.normal(mean, np.sqrt(max(variance, 0.0)), size=shots)
    return SampleSet(setting, samples)


def _averaged_output_mean(
    output: GaussianState, shots: int, seed: int, stage: int, record_key: int
) -> np.ndarray:
    dim = 2 * output.modes
    measured = np.empty(dim)
    std = np.sqrt(np.clip(np.diag(output.cov), 0.0, None))
    for k in range(dim):
        rng = substream_rng(seed, stage, record_key, k)
        measured[k] = rng.normal(output.mean[k], std[k], size=shots).mean()
    return measured


def measure_output_means(
    channel: GaussianChannel, probes: list[GaussianState], shots: int, seed: int
) -> list[ProbeRecord]:
    """Send each probe through the channel and record shot-averaged means.

    Each output quadrature is averaged over ``shots`` fresh samples drawn
    with the true output variance, so every entry carries standard error
    sqrt(V'_kk / shots).
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    records = []
    for n, probe in enumerate(probes, start=1):
        output = apply_channel(channel, probe)
        measured = _averaged_output_mean(output, shots, seed, _STAGE_MEAN, n)
        records.append(ProbeRecord(probe.mean.copy(), n, measured, shots))
    return records


def measure_vacuum_response(
    channel: GaussianChannel, shots: int, seed: int
) -> ProbeRecord:
    """Zero-input record: shot-averaged output mean for the vacuum probe."""
    probe = vacuum_state(channel.modes)
    output = apply_channel(channel, probe)
    measured = _averaged_output_mean(output, shots, seed, _STAGE_MEAN, 0)
    return ProbeRecord(probe.mean.copy(), 0, measured, shots)


def vacuum_stage_samples(
    channel: GaussianChannel, shots: int, seed: int
) -> list[SampleSet]:
    """Homodyne samples of the vacuum-probed output over the full catalog.

    Setting k uses the substream (seed, vacuum-stage, k), so the sample
    sets are reproducible and order-independent.
    """
    output = apply_channel(channel, vacuum_state(channel.modes))
    sets = []
    for k, setting in enumerate(setting_catalog(channel.modes)):
        rng = substream_rng(seed, _STAGE_VACUUM, k)
        sets.append(sample_quadrature(output, setting, shots, rng))
    return sets


def eigenprobe_rng(seed: int, probe: int, quadrature: int) -> np.random.Generator:
    """Substream for direct eigenquadrature-probe measurements."""
    return substream_rng(seed, _STAGE_EIGENPROBE, probe, quadrature)
