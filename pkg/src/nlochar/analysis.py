"""Decompositions and entanglement predictions for reconstructed channels.

The singular value decomposition of the amplification matrix splits a
multimode process into independent single-quadrature amplifiers: input
eigenquadratures (columns of V), output eigenquadratures (columns of U),
and their gains (diagonal of D). Noise matrices are analyzed by plain
eigendecomposition. Sign and degeneracy conventions are fixed so results
are comparable across runs.
"""

from dataclasses import dataclass

import numpy as np

from .core import GaussianChannel, GaussianState, apply_channel, coherent_state
from .errors import InvalidDimensionError
from .measurement import eigenprobe_rng

DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class EigenAnalysis:
    """SVD factors of an amplification matrix, A = U diag(d) V^T."""

    u: np.ndarray
    d: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("u", "d", "v"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def modes(self) -> int:
        return self.u.shape[0] // 2

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.d) @ self.v.T


@dataclass(frozen=True)
class ModeAmplitudePhase:
    """Per-mode amplitude/phase view of a quadrature vector."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=float).copy()
        ph = np.asarray(self.phases, dtype=float).copy()
        amp.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "phases", ph)


@dataclass(frozen=True)
class EigenprobeReport:
    """Measured gains and output-eigenquadrature overlaps per probe."""

    gains: np.ndarray
    overlaps: np.ndarray
    expected_gains: np.ndarray

    def __post_init__(self):
        for name in ("gains", "overlaps", "expected_gains"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _fix_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make the largest-magnitude entry of each V column positive."""
    u = u.copy()
    v = v.copy()
    for m in range(v.shape[1]):
        lead = np.argmax(np.abs(v[:, m]))
        if v[lead, m] < 0.0:
            v[:, m] = -v[:, m]
            u[:, m] = -u[:, m]
    return u, v


def svd_channel(amp) -> EigenAnalysis:
    """Singular value decomposition with a deterministic sign convention.

    Singular values are sorted descending; each column of V has its
    largest-magnitude entry positive (ties resolved by lowest index) and
    U is flipped to compensate, so U diag(d) V^T reproduces the input.
    """
    amp = np.asarray(amp, dtype=float)
    if amp.ndim != 2 or amp.shape[0] != amp.shape[1] or amp.shape[0] % 2:
        raise InvalidDimensionError(
            f"amplification matrix must be square with even dimension, got {amp.shape}"
        )
    if not np.all(np.isfinite(amp)):
        raise ValueError("amplification matrix has non-finite entries")
    u, d, vt = np.linalg.svd(amp)
    u, v = _fix_signs(u, vt.T)
    return EigenAnalysis(u, d, v)


def to_amplitude_phase(vec) -> ModeAmplitudePhase:
    """Per-mode amplitude sqrt(x_m^2 + p_m^2) and four-quadrant phase.

    Zero-amplitude modes report phase 0; phases lie in (-pi, pi].
    """
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1 or vec.size % 2:
        raise InvalidDimensionError(f"quadrature vector must have even length, got {vec.shape}")
    m = vec.size // 2
    x, p = vec[:m], vec[m:]
    amplitudes = np.hypot(x, p)
    phases = np.arctan2(p, x)
    phases = np.where(amplitudes == 0.0, 0.0, phases)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    return ModeAmplitudePhase(amplitudes, phases)


def noise_eigendecomposition(noise) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a noise matrix.

    Columns of the returned eigenvector matrix are the noise
    eigenquadratures, with the same largest-entry-positive sign
    convention as :func:`svd_channel`.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.ndim != 2 or noise.shape[0] != noise.shape[1]:
        raise InvalidDimensionError(f"noise matrix must be square, got {noise.shape}")
    if np.max(np.abs(noise - noise.T), initial=0.0) > 1e-8:
        raise ValueError("noise matrix must be symmetric")
    evals, evecs = np.linalg.eigh((noise + noise.T) / 2.0)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    for m in range(evecs.shape[1]):
        lead = np.argmax(np.abs(evecs[:, m]))
        if evecs[lead, m] < 0.0:
            evecs[:, m] = -evecs[:, m]
    return evals.copy(), evecs.copy()


def predict_output(channel: GaussianChannel, state: GaussianState) -> GaussianState:
    """Output state predicted by the channel matrices (alias of apply_channel)."""
    return apply_channel(channel, state)


def degenerate_groups(values, rtol: float = DEGENERACY_RTOL) -> list[np.ndarray]:
    """Index groups of (near-)equal values in a descending-sorted array."""
    values = np.asarray(values, dtype=float)
    groups = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or abs(values[i - 1] - values[i]) > rtol * max(
            1.0, abs(values[start])
        ):
            groups.append(np.arange(start, i))
            start = i
    return groups


def subspace_overlap(basis: np.ndarray, vector: np.ndarray) -> float:
    """Squared norm of the projection of a unit vector onto a column span."""
    return float(np.sum((basis.T @ vector) ** 2))


def verify_eigenquadratures(
    channel: GaussianChannel,
    analysis: EigenAnalysis,
    shots: int,
    seed: int,
    q_amplitude: float = 10.0,
) -> EigenprobeReport:
    """Direct eigenquadrature probing against the SVD prediction.

    Probe m is a coherent state along input eigenquadrature v_m with
    amplitude q; the report contains the measured gain |q'| / q and the
    squared overlap of the normalized output mean with the predicted
    output eigenquadrature. Degenerate gains make individual singular
    vectors ambiguous, so overlaps project onto the degenerate subspace.
    """
    dim = 2 * channel.modes
    if analysis.u.shape != (dim, dim):
        raise InvalidDimensionError(
            f"analysis is {analysis.u.shape[0]}-dimensional, channel needs {dim}"
        )
    groups = degenerate_groups(analysis.d)
    group_of = {}
    for group in groups:
        for m in group:
            group_of[int(m)] = group
    gains = np.empty(dim)
    overlaps = np.empty(dim)
    for m in range(dim):
        probe = coherent_state(q_amplitude * analysis.v[:, m])
        output = apply_channel(channel, probe)
        std = np.sqrt(np.clip(np.diag(output.cov), 0.0, None))
        measured = np.empty(dim)
        for k in range(dim):
            rng = eigenprobe_rng(seed, m, k)
            measured[k] = rng.normal(output.mean[k], std[k], size=shots).mean()
        response = measured - channel.disp
        norm = np.linalg.norm(response)
        gains[m] = norm / q_amplitude
        direction = response / norm if norm > 0.0 else response
        overlaps[m] = subspace_overlap(analysis.u[:, group_of[m]], direction)
    return EigenprobeReport(gains, overlaps, analysis.d.copy())
