"""Truncated Fock-space oracle for one- and two-mode moments.

Brute-force ground truth used by the test suite: states are explicit
photon-number amplitude tensors, quadrature moments come from ladder
operator matrix elements (x = a + a^dag, p = (a - a^dag)/i), and loss is
the per-mode attenuation of those moments (beamsplitter with a vacuum
ancilla, ancilla traced out). Nothing here shares code with the Gaussian
covariance machinery it validates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LeakageExceededError

LEAKAGE_LIMIT = 1e-6


@dataclass(frozen=True)
class FockState:
    """Photon-number amplitudes of a 1- or 2-mode state up to a cutoff."""

    amplitudes: np.ndarray
    cutoff: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).copy()
        if amp.ndim not in (1, 2):
            raise ValueError(f"only 1- or 2-mode states supported, got ndim {amp.ndim}")
        if any(s != self.cutoff + 1 for s in amp.shape):
            raise ValueError(
                f"amplitude tensor shape {amp.shape} does not match cutoff {self.cutoff}"
            )
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def leakage(self) -> float:
        return 1.0 - self.norm_squared


def _annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def build_two_mode_squeezer_state(r: float, cutoff: int) -> FockState:
    """Two-mode squeezed vacuum sum_n tanh(r)^n / cosh(r) |n, n>."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    floor = 10.0 * np.sinh(r) ** 2
    if cutoff < floor:
        raise LeakageExceededError(
            f"cutoff {cutoff} below heuristic floor {floor:.1f} for r={r}"
        )
    n = np.arange(cutoff + 1)
    weights = np.tanh(r) ** n / np.cosh(r)
    amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amp[n, n] = weights
    state = FockState(amp, cutoff)
    if state.leakage > LEAKAGE_LIMIT:
        raise LeakageExceededError(
            f"truncation leakage {state.leakage:.2e} exceeds {LEAKAGE_LIMIT} at cutoff {cutoff}"
        )
    return state


def build_coherent_state(alpha: complex, cutoff: int) -> FockState:
    """Single-mode coherent state truncated at the cutoff."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    n = np.arange(cutoff + 1)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, cutoff + 1))]))
    amp = np.exp(-0.5 * abs(alpha) ** 2) * np.power(complex(alpha), n) / np.exp(
        0.5 * log_fact
    )
    state = FockState(amp, cutoff)
    if state.leakage > LEAKAGE_LIMIT:
        raise LeakageExceededError(
            f"truncation leakage {state.leakage:.2e} exceeds {LEAKAGE_LIMIT} at cutoff {cutoff}"
        )
    return state


def _apply_mode_operator(amp: np.ndarray, op: np.ndarray, mode: int) -> np.ndarray:
    if amp.ndim == 1:
        return op @ amp
    if mode == 0:
        return op @ amp
    return amp @ op.T


def quadrature_moments(state: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Mean quadrature vector and covariance matrix in xxpp ordering.

    Covariances are symmetrized second moments
    <{dq_m, dq_n}/2> = Re<q_m q_n> - <q_m><q_n>, evaluated by applying
    the ladder-operator matrices to the amplitude tensor.
    """
    if state.leakage > LEAKAGE_LIMIT:
        raise LeakageExceededError(
            f"state leakage {state.leakage:.2e} exceeds {LEAKAGE_LIMIT}"
        )
    a = _annihilation(state.cutoff)
    x_op = a + a.T
    p_op = (a - a.T) / 1j
    modes = state.modes
    psi = state.amplitudes
    # quadrature order (x_1..x_M, p_1..p_M)
    applied = []
    for op in (x_op, p_op):
        for mode in range(modes):
            applied.append(_apply_mode_operator(psi, op, mode))
    dim = 2 * modes
    mean = np.empty(dim)
    for k in range(dim):
        mean[k] = np.real(np.vdot(psi, applied[k]))
    cov = np.empty((dim, dim))
    for i in range(dim):
        for j in range(dim):
            second = np.real(np.vdot(applied[i], applied[j]))
            cov[i, j] = second - mean[i] * mean[j]
    return mean, (cov + cov.T) / 2.0


def apply_loss_fock(state: FockState, eta) -> tuple[np.ndarray, np.ndarray]:
    """Moments of the state after per-mode attenuation.

    ``eta`` is a scalar (applied to every mode) or one transmissivity per
    mode. Mixing with a vacuum ancilla scales each quadrature by
    sqrt(eta_m) and adds (1 - eta_m) vacuum noise on the diagonal:
    mean' = t * mean, cov' = (t t^T) * cov + diag(1 - t^2) with
    t_k = sqrt(eta of mode k), applied entrywise.
    """
    etas = np.atleast_1d(np.asarray(eta, dtype=float))
    if etas.size == 1:
        etas = np.full(state.modes, etas[0])
    if etas.size != state.modes:
        raise ValueError(
            f"need one transmissivity per mode ({state.modes}), got {etas.size}"
        )
    if np.any(etas < 0.0) or np.any(etas > 1.0):
        raise ValueError(f"transmissivities must lie in [0, 1], got {etas}")
    mean, cov = quadrature_moments(state)
    t = np.sqrt(np.concatenate([etas, etas]))
    lossy_mean = t * mean
    lossy_cov = np.outer(t, t) * cov + np.diag(1.0 - t**2)
    return lossy_mean, (lossy_cov + lossy_cov.T) / 2.0
