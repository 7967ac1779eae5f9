"""Gaussian states and channels in the xxpp quadrature ordering.

Conventions used throughout the package: an M-mode quadrature vector is
ordered (x_1, ..., x_M, p_1, ..., p_M), the commutator is [x, p] = 2i,
and the vacuum covariance matrix is the identity (vacuum variance 1).
A channel maps mean and covariance as

    q' = A q + d
    V' = A V A^T + N

with A real 2Mx2M, N real symmetric 2Mx2M, and d a real displacement.
The channel is physical when N + i(Omega - A Omega A^T) is positive
semidefinite, where Omega is the symplectic form.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrixError, InvalidDimensionError, InvalidPartitionError

SYMMETRY_ATOL = 1e-10
PHYSICALITY_ATOL = 1e-9


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_quadrature_vector(x, name: str = "quadrature vector") -> np.ndarray:
    """Validate and return a copy of a length-2M quadrature vector."""
    vec = _as_float_array(x, name).copy()
    if vec.ndim != 1 or vec.size == 0 or vec.size % 2 != 0:
        raise InvalidDimensionError(
            f"{name} must be a 1-d vector of even length, got shape {vec.shape}"
        )
    return vec


def as_covariance_matrix(v, name: str = "covariance matrix") -> np.ndarray:
    """Validate symmetry and return the exactly symmetrized matrix."""
    mat = _as_float_array(v, name)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2 != 0:
        raise InvalidDimensionError(
            f"{name} must be square with even dimension, got shape {mat.shape}"
        )
    asym = np.max(np.abs(mat - mat.T)) if mat.size else 0.0
    if asym > SYMMETRY_ATOL:
        raise ValueError(f"{name} is asymmetric by {asym:.3e} (> {SYMMETRY_ATOL})")
    return (mat + mat.T) / 2.0


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GaussianState:
    """Mean quadrature vector and covariance matrix of an M-mode state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = as_quadrature_vector(self.mean, "state mean")
        cov = as_covariance_matrix(self.cov, "state covariance")
        if cov.shape[0] != mean.size:
            raise InvalidDimensionError(
                f"mean length {mean.size} does not match covariance dimension {cov.shape[0]}"
            )
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "cov", _freeze(cov))

    @property
    def modes(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class GaussianChannel:
    """Amplification matrix, noise matrix, and displacement of a channel."""

    amp: np.ndarray
    noise: np.ndarray
    disp: np.ndarray

    def __post_init__(self):
        amp = _as_float_array(self.amp, "amplification matrix").copy()
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1] or amp.shape[0] % 2 != 0:
            raise InvalidDimensionError(
                f"amplification matrix must be square with even dimension, got {amp.shape}"
            )
        noise = as_covariance_matrix(self.noise, "noise matrix")
        disp = as_quadrature_vector(self.disp, "displacement")
        if noise.shape[0] != amp.shape[0] or disp.size != amp.shape[0]:
            raise InvalidDimensionError(
                "amplification, noise, and displacement dimensions disagree: "
                f"{amp.shape}, {noise.shape}, ({disp.size},)"
            )
        object.__setattr__(self, "amp", _freeze(amp))
        object.__setattr__(self, "noise", _freeze(noise))
        object.__setattr__(self, "disp", _freeze(disp))

    @property
    def modes(self) -> int:
        return self.amp.shape[0] // 2


@dataclass(frozen=True)
class ComplexChannelPair:
    """Complex matrices (G, H) of the classical field input-output relation.

    The output field amplitude is E'_n = sum_m (G_nm E_m + H_nm E*_m);
    H carries the phase-conjugating part of the process.
    """

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex).copy()
        h = np.asarray(self.h, dtype=complex).copy()
        if g.shape != h.shape or g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidDimensionError(
                f"G and H must be square matrices of equal shape, got {g.shape} and {h.shape}"
            )
        object.__setattr__(self, "g", _freeze(g))
        object.__setattr__(self, "h", _freeze(h))

    @property
    def modes(self) -> int:
        return self.g.shape[0]


def omega(modes: int) -> np.ndarray:
    """Symplectic form [[0, I], [-I, 0]] for M modes in xxpp ordering."""
    if modes < 1:
        raise InvalidDimensionError(f"modes must be >= 1, got {modes}")
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [-eye, zero]])


def is_symplectic(a: np.ndarray, atol: float = 1e-10) -> bool:
    """Whether A Omega A^T = Omega within an absolute tolerance."""
    a = np.asarray(a, dtype=float)
    om = omega(a.shape[0] // 2)
    return bool(np.max(np.abs(a @ om @ a.T - om)) <= atol)


def vacuum_state(modes: int) -> GaussianState:
    """M-mode vacuum: zero mean, identity covariance."""
    if modes < 1:
        raise InvalidDimensionError(f"modes must be >= 1, got {modes}")
    return GaussianState(np.zeros(2 * modes), np.eye(2 * modes))


def coherent_state(mean) -> GaussianState:
    """Coherent state with the given mean quadrature vector and vacuum noise."""
    mean = as_quadrature_vector(mean, "coherent mean")
    return GaussianState(mean, np.eye(mean.size))


def identity_channel(modes: int) -> GaussianChannel:
    """Channel that leaves every state unchanged (A=I, N=0, d=0)."""
    if modes < 1:
        raise InvalidDimensionError(f"modes must be >= 1, got {modes}")
    dim = 2 * modes
    return GaussianChannel(np.eye(dim), np.zeros((dim, dim)), np.zeros(dim))


def apply_channel(channel: GaussianChannel, state: GaussianState) -> GaussianState:
    """Propagate a state through a channel: q' = Aq + d, V' = AVA^T + N.

    The output covariance is symmetrized to remove floating-point skew.
    """
    if channel.modes != state.modes:
        raise InvalidDimensionError(
            f"channel acts on {channel.modes} modes but state has {state.modes}"
        )
    mean = channel.amp @ state.mean + channel.disp
    cov = channel.amp @ state.cov @ channel.amp.T + channel.noise
    cov = (cov + cov.T) / 2.0
    return GaussianState(mean, cov)


def compose(second: GaussianChannel, first: GaussianChannel) -> GaussianChannel:
    """Channel equal to applying ``first`` and then ``second``."""
    if second.modes != first.modes:
        raise InvalidDimensionError(
            f"cannot compose channels on {second.modes} and {first.modes} modes"
        )
    amp = second.amp @ first.amp
    noise = second.amp @ first.noise @ second.amp.T + second.noise
    disp = second.amp @ first.disp + second.disp
    return GaussianChannel(amp, (noise + noise.T) / 2.0, disp)


def physicality_margin(channel: GaussianChannel) -> float:
    """Minimum eigenvalue of the Hermitian matrix N + i(Omega - A Omega A^T).

    Non-negative (within -1e-9) means the channel respects the uncertainty
    principle; the more negative the margin, the more unphysical the pair
    (A, N).
    """
    om = omega(channel.modes)
    herm = channel.noise + 1j * (om - channel.amp @ om @ channel.amp.T)
    return float(np.linalg.eigvalsh(herm)[0])


def state_physicality(cov) -> float:
    """Minimum eigenvalue of V + i Omega; >= 0 for a physical state."""
    cov = as_covariance_matrix(cov, "covariance matrix")
    herm = cov + 1j * omega(cov.shape[0] // 2)
    return float(np.linalg.eigvalsh(herm)[0])


def to_amp_matrix(pair: ComplexChannelPair) -> np.ndarray:
    """Real 2Mx2M amplification matrix equivalent to the (G, H) pair.

    Block form: [[Re(G+H), Im(H-G)], [Im(G+H), Re(G-H)]].
    """
    g, h = pair.g, pair.h
    return np.block(
        [
            [(g + h).real, (h - g).imag],
            [(g + h).imag, (g - h).real],
        ]
    )


def from_amp_matrix(a) -> ComplexChannelPair:
    """Unique (G, H) pair reproducing the given amplification matrix."""
    a = _as_float_array(a, "amplification matrix")
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 != 0:
        raise InvalidDimensionError(
            f"amplification matrix must be square with even dimension, got {a.shape}"
        )
    m = a.shape[0] // 2
    axx, axp = a[:m, :m], a[:m, m:]
    apx, app = a[m:, :m], a[m:, m:]
    g = (axx + app) / 2.0 + 1j * (apx - axp) / 2.0
    h = (axx - app) / 2.0 + 1j * (apx + axp) / 2.0
    return ComplexChannelPair(g, h)


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic spectrum of a positive definite covariance matrix.

    Returns the M distinct values (each doubly degenerate pair reported
    once), sorted descending. A physical state has all values >= 1.
    """
    cov = as_covariance_matrix(cov, "covariance matrix")
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] <= 0.0:
        raise DegenerateMatrixError(
            f"covariance matrix is not positive definite (min eigenvalue {evals[0]:.3e})"
        )
    sqrt_cov = (evecs * np.sqrt(evals)) @ evecs.T
    m = cov.shape[0] // 2
    herm = 1j * (sqrt_cov @ omega(m) @ sqrt_cov)
    spectrum = np.linalg.eigvalsh(herm)
    return spectrum[m:][::-1].copy()


def ppt_min_eigenvalue(cov, transposed_modes) -> float:
    """Minimum eigenvalue of PT(V) + i Omega for a mode bipartition.

    The partial transpose flips the sign of p_m for every mode m in
    ``transposed_modes`` (0-based). A negative value certifies
    entanglement across the partition.
    """
    cov = as_covariance_matrix(cov, "covariance matrix")
    m = cov.shape[0] // 2
    subset = sorted(set(int(i) for i in transposed_modes))
    if any(i < 0 or i >= m for i in subset):
        raise InvalidPartitionError(f"mode indices {subset} out of range for M={m}")
    if len(subset) == 0 or len(subset) == m:
        raise InvalidPartitionError(
            "transposed subset must be a proper non-empty subset of the modes"
        )
    signs = np.ones(2 * m)
    for i in subset:
        signs[m + i] = -1.0
    transposed = cov * np.outer(signs, signs)
    herm = transposed + 1j * omega(m)
    return float(np.linalg.eigvalsh(herm)[0])


def reduced_covariance(cov, modes) -> np.ndarray:
    """Covariance of a subset of modes, keeping the xxpp ordering."""
    cov = as_covariance_matrix(cov, "covariance matrix")
    m = cov.shape[0] // 2
    subset = [int(i) for i in modes]
    if len(subset) == 0 or len(set(subset)) != len(subset):
        raise InvalidPartitionError(f"mode subset {subset} must be non-empty and unique")
    if any(i < 0 or i >= m for i in subset):
        raise InvalidPartitionError(f"mode indices {subset} out of range for M={m}")
    idx = np.array(subset + [i + m for i in subset])
    return cov[np.ix_(idx, idx)].copy()
