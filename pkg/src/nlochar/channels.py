"""Constructors for the channels used as ground truth in experiments.

Everything returns a :class:`~nlochar.core.GaussianChannel` in xxpp
ordering. Lossless, noiseless constructors produce symplectic
amplification matrices (physicality margin 0); loss and noise
constructors sit on or inside the physical cone by construction.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import GaussianChannel, as_covariance_matrix, omega
from .errors import InvalidDimensionError


@dataclass(frozen=True)
class DfgSpec:
    """Array of phase-insensitive amplifiers on conjugate mode pairs.

    Mode m is paired with mode M-1-m (0-based mirror pairing), so the
    amplification matrix has an anti-diagonal coupling pattern. One
    squeeze parameter per pair, ordered by the lower mode index.
    """

    modes: int
    squeeze: tuple

    def __post_init__(self):
        if self.modes < 2 or self.modes % 2 != 0:
            raise InvalidDimensionError(
                f"amplifier array needs an even mode count >= 2, got {self.modes}"
            )
        sq = np.atleast_1d(np.asarray(self.squeeze, dtype=float))
        if sq.size == 1:
            sq = np.full(self.modes // 2, sq[0])
        if sq.size != self.modes // 2:
            raise InvalidDimensionError(
                f"need one squeeze parameter per pair ({self.modes // 2}), got {sq.size}"
            )
        if not np.all(np.isfinite(sq)):
            raise ValueError("squeeze parameters must be finite")
        object.__setattr__(self, "squeeze", tuple(float(r) for r in sq))

    @property
    def pairs(self) -> list:
        return [(m, self.modes - 1 - m) for m in range(self.modes // 2)]


@dataclass(frozen=True)
class GraphSpec:
    """Graph adjacency and overall squeeze for cluster-state generation."""

    adjacency: np.ndarray
    squeeze: float

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InvalidDimensionError(f"adjacency must be square, got {adj.shape}")
        if np.max(np.abs(adj - adj.T), initial=0.0) > 1e-10:
            raise ValueError("adjacency matrix must be symmetric")
        if np.any(np.diag(adj) != 0.0):
            raise ValueError("adjacency matrix must have zero diagonal")
        adj = (adj + adj.T) / 2.0
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "squeeze", float(self.squeeze))

    @property
    def modes(self) -> int:
        return self.adjacency.shape[0]


@dataclass(frozen=True)
class LossSpec:
    """Per-mode transmissivities, optionally acting in a rotated mode basis.

    ``rotation`` is an orthogonal symplectic 2Mx2M matrix; loss acts in
    its column basis, which puts off-diagonal entries into the noise
    matrix for a nontrivial rotation.
    """

    transmissivities: tuple
    rotation: np.ndarray | None = None

    def __post_init__(self):
        eta = np.atleast_1d(np.asarray(self.transmissivities, dtype=float))
        if eta.ndim != 1 or eta.size < 1:
            raise InvalidDimensionError("transmissivities must be a non-empty vector")
        if np.any(eta < 0.0) or np.any(eta > 1.0):
            raise ValueError(f"transmissivities must lie in [0, 1], got {eta}")
        object.__setattr__(self, "transmissivities", tuple(float(e) for e in eta))
        if self.rotation is not None:
            rot = np.asarray(self.rotation, dtype=float)
            dim = 2 * eta.size
            if rot.shape != (dim, dim):
                raise InvalidDimensionError(
                    f"rotation must be {dim}x{dim}, got {rot.shape}"
                )
            if np.max(np.abs(rot @ rot.T - np.eye(dim))) > 1e-8:
                raise ValueError("rotation must be orthogonal")
            om = omega(eta.size)
            if np.max(np.abs(rot @ om @ rot.T - om)) > 1e-8:
                raise ValueError("rotation must be symplectic")
            rot = rot.copy()
            rot.setflags(write=False)
            object.__setattr__(self, "rotation", rot)

    @property
    def modes(self) -> int:
        return len(self.transmissivities)


def two_mode_squeezer(r: float, mode_a: int, mode_b: int, total_modes: int) -> GaussianChannel:
    """Phase-insensitive amplifier coupling two modes.

    Quadrature action: x_a' = cosh(r) x_a + sinh(r) x_b and
    p_a' = cosh(r) p_a - sinh(r) p_b (symmetric in a <-> b), identity on
    all other modes. The sign flip between the x and p couplings is the
    phase-conjugation signature.
    """
    if total_modes < 2:
        raise InvalidDimensionError(f"need at least 2 modes, got {total_modes}")
    if not (0 <= mode_a < total_modes and 0 <= mode_b < total_modes):
        raise InvalidDimensionError(
            f"mode indices ({mode_a}, {mode_b}) out of range for {total_modes} modes"
        )
    if mode_a == mode_b:
        raise InvalidDimensionError("two-mode squeezer needs distinct modes")
    dim = 2 * total_modes
    amp = np.eye(dim)
    ch, sh = np.cosh(r), np.sinh(r)
    for i in (mode_a, mode_b):
        amp[i, i] = ch
        amp[total_modes + i, total_modes + i] = ch
    amp[mode_a, mode_b] = amp[mode_b, mode_a] = sh
    amp[total_modes + mode_a, total_modes + mode_b] = -sh
    amp[total_modes + mode_b, total_modes + mode_a] = -sh
    return GaussianChannel(amp, np.zeros((dim, dim)), np.zeros(dim))


def dfg_array(spec: DfgSpec) -> GaussianChannel:
    """Disjoint two-mode squeezers on mirror pairs (m, M-1-m).

    On vacuum input this produces M/2 independent EPR pairs; the x-block
    anti-diagonal of A carries +sinh(r) and the p-block -sinh(r).
    """
    dim = 2 * spec.modes
    amp = np.eye(dim)
    for (a, b), r in zip(spec.pairs, spec.squeeze):
        block = two_mode_squeezer(r, a, b, spec.modes).amp
        amp = block @ amp
    return GaussianChannel(amp, np.zeros((dim, dim)), np.zeros(dim))


def loss_channel(spec: LossSpec) -> GaussianChannel:
    """Mode-dependent attenuation, optionally in a rotated basis.

    In the loss eigenbasis A = diag(sqrt(eta)) on x and p and
    N = diag(1 - eta); a rotation R conjugates both, so correlated
    (off-diagonal) noise appears whenever R mixes modes.
    """
    eta = np.asarray(spec.transmissivities)
    sqrt_eta = np.concatenate([np.sqrt(eta), np.sqrt(eta)])
    residual = np.concatenate([1.0 - eta, 1.0 - eta])
    amp = np.diag(sqrt_eta)
    noise = np.diag(residual)
    if spec.rotation is not None:
        rot = spec.rotation
        amp = rot @ amp @ rot.T
        noise = rot @ noise @ rot.T
        noise = (noise + noise.T) / 2.0
    dim = 2 * spec.modes
    return GaussianChannel(amp, noise, np.zeros(dim))


def cluster_channel(spec: GraphSpec) -> GaussianChannel:
    """Symplectic channel whose vacuum image is the graph cluster state.

    Built as M single-mode squeezers (p squeezed by exp(-r)) followed by
    the controlled-phase network of the graph, so every nullifier
    p_k - sum_j adjacency[k, j] x_j has output variance exp(-2r)
    regardless of the graph. Any symplectic with this vacuum image is
    equivalent for characterization purposes.
    """
    m = spec.modes
    r = spec.squeeze
    eye = np.eye(m)
    zero = np.zeros((m, m))
    squeezers = np.block([[np.exp(r) * eye, zero], [zero, np.exp(-r) * eye]])
    cz = np.block([[eye, zero], [spec.adjacency, eye]])
    amp = cz @ squeezers
    return GaussianChannel(amp, np.zeros((2 * m, 2 * m)), np.zeros(2 * m))


def nullifier_variances(cov, adjacency) -> np.ndarray:
    """Variances of the graph nullifiers p_k - sum_j A_kj x_j."""
    cov = as_covariance_matrix(cov, "covariance matrix")
    adj = np.asarray(adjacency, dtype=float)
    m = adj.shape[0]
    if cov.shape[0] != 2 * m:
        raise InvalidDimensionError(
            f"covariance is {cov.shape[0]}x{cov.shape[0]} but graph has {m} nodes"
        )
    rows = np.hstack([-adj, np.eye(m)])
    return np.diag(rows @ cov @ rows.T).copy()


def quantum_noise_channel(eta: float, noise_squeeze: float, modes: int) -> GaussianChannel:
    """Strong attenuation mixed with a correlated quantum environment.

    A = sqrt(eta) I; N = (1 - eta) V_env where V_env is the covariance of
    two-mode-squeezed vacuum (parameter ``noise_squeeze``) on the mirror
    pairs (m, M-1-m). The channel is physical for all parameters since
    V_env + i Omega >= 0.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not np.isfinite(noise_squeeze):
        raise ValueError("noise_squeeze must be finite")
    env = dfg_array(DfgSpec(modes, noise_squeeze))
    v_env = env.amp @ env.amp.T
    dim = 2 * modes
    amp = np.sqrt(eta) * np.eye(dim)
    noise = (1.0 - eta) * v_env
    return GaussianChannel(amp, (noise + noise.T) / 2.0, np.zeros(dim))


def classical_noise_channel(n_cl) -> GaussianChannel:
    """Additive classical noise: A = I, N = n_cl, d = 0.

    Physical iff n_cl is positive semidefinite; the physicality margin
    reports validity either way.
    """
    noise = as_covariance_matrix(n_cl, "classical noise matrix")
    dim = noise.shape[0]
    return GaussianChannel(np.eye(dim), noise, np.zeros(dim))


def interferometer_symplectic(unitary) -> np.ndarray:
    """Orthogonal symplectic 2Mx2M matrix of a passive MxM interferometer."""
    u = np.asarray(unitary, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidDimensionError(f"unitary must be square, got {u.shape}")
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-8:
        raise ValueError("interferometer matrix must be unitary")
    re, im = u.real, u.imag
    return np.block([[re, -im], [im, re]])


def pairwise_rotation(theta: float, mode_a: int, mode_b: int, total_modes: int) -> np.ndarray:
    """Orthogonal symplectic rotation mixing two modes by angle theta.

    theta = pi/4 is a balanced (50:50) beamsplitter.
    """
    if not (0 <= mode_a < total_modes and 0 <= mode_b < total_modes) or mode_a == mode_b:
        raise InvalidDimensionError(
            f"invalid mode pair ({mode_a}, {mode_b}) for {total_modes} modes"
        )
    u = np.eye(total_modes)
    c, s = np.cos(theta), np.sin(theta)
    u[mode_a, mode_a] = c
    u[mode_b, mode_b] = c
    u[mode_a, mode_b] = s
    u[mode_b, mode_a] = -s
    return interferometer_symplectic(u)


def random_orthogonal_symplectic(modes: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random passive interferometer as an orthogonal symplectic."""
    z = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return interferometer_symplectic(q)


def random_symplectic(
    modes: int, rng: np.random.Generator, max_squeeze: float = 0.8
) -> np.ndarray:
    """Random symplectic via interferometer-squeezers-interferometer."""
    z = rng.uniform(-max_squeeze, max_squeeze, size=modes)
    squeezers = np.diag(np.concatenate([np.exp(z), np.exp(-z)]))
    left = random_orthogonal_symplectic(modes, rng)
    right = random_orthogonal_symplectic(modes, rng)
    return left @ squeezers @ right


def random_physical_covariance(modes: int, rng: np.random.Generator) -> np.ndarray:
    """Random covariance with V + i Omega >= 0 guaranteed by construction.

    A random pure-state covariance S S^T plus a random classical part
    L L^T stays physical because the classical part is PSD.
    """
    s = random_symplectic(modes, rng, max_squeeze=0.6)
    l_factor = rng.normal(scale=0.3, size=(2 * modes, 2 * modes))
    v = s @ s.T + l_factor @ l_factor.T
    return (v + v.T) / 2.0


def random_physical_channel(modes: int, rng: np.random.Generator) -> GaussianChannel:
    """Random channel satisfying the physicality condition by construction.

    The amplification matrix is an arbitrary real matrix; the noise is a
    spectral shift that dominates i(A Omega A^T - Omega) plus a random
    PSD part, so the margin is non-negative.
    """
    dim = 2 * modes
    amp = rng.normal(scale=0.6, size=(dim, dim))
    om = omega(modes)
    deficit = np.linalg.eigvalsh(1j * (om - amp @ om @ amp.T))[0]
    shift = max(0.0, -deficit)
    l_factor = rng.normal(scale=0.3, size=(dim, dim))
    noise = shift * np.eye(dim) + l_factor @ l_factor.T
    disp = rng.normal(scale=0.5, size=dim)
    return GaussianChannel(amp, (noise + noise.T) / 2.0, disp)


def squeeze_for_loss_ppt_target(eta: float, target: float) -> float:
    """Squeeze parameter of an amplifier pair followed by uniform loss eta
    whose vacuum-output pair negativity equals ``target``.

    Solves eta * (exp(-2r) - 1) = target by bracketed root-finding.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if not -eta < target < 0.0:
        raise ValueError(f"target must lie in (-eta, 0), got {target}")
    return brentq(lambda r: eta * np.expm1(-2.0 * r) - target, 0.0, 50.0, xtol=1e-14)


def noise_squeeze_for_ppt_target(eta: float, target: float) -> float:
    """Environment squeeze of a quantum noise channel whose vacuum-output
    negativity equals ``target``.

    Solves (1 - eta) * (exp(-2r) - 1) = target by bracketed root-finding.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    if not -(1.0 - eta) < target < 0.0:
        raise ValueError(f"target must lie in (-(1 - eta), 0), got {target}")
    return brentq(
        lambda r: (1.0 - eta) * np.expm1(-2.0 * r) - target, 0.0, 50.0, xtol=1e-14
    )
