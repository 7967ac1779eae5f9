"""Channel reconstruction from probe records and homodyne samples.

The amplification matrix is read off the coherent-probe stage column by
column (response divided by probe amplitude). The noise matrix is fitted
to the vacuum-stage sample variances by maximizing the Gaussian
log-likelihood

    L(N) = sum_k n_k/2 * (-ln s2_k(N) - v_k / s2_k(N)),
    s2_k(N) = w_k^T (A A^T + N) w_k,

subject to the physicality constraint N + i(Omega - A Omega A^T) >= 0.
Optimization is projected gradient ascent with Armijo backtracking;
feasibility is restored by Dykstra alternating projections between the
PSD cone and the affine set of Hermitian matrices with the fixed
imaginary part Omega - A Omega A^T.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import GaussianChannel, omega
from .errors import InvalidDimensionError, MissingSettingError
from .measurement import (
    ProbeRecord,
    SampleSet,
    measure_output_means,
    measure_vacuum_response,
    probe_sequence,
    setting_catalog,
    vacuum_stage_samples,
)

VARIANCE_FLOOR = 1e-12
MARGIN_GUARANTEE = -1e-8


@dataclass
class MleOptions:
    """Knobs of the constrained maximum-likelihood fit."""

    max_iterations: int = 5000
    rel_tol: float = 1e-10
    armijo_c: float = 1e-4
    min_step: float = 1e-14
    dykstra_tol: float = 1e-12
    dykstra_max_iterations: int = 500


@dataclass
class ProtocolOptions:
    """Configuration of the two-stage characterization protocol."""

    q_amplitude: float = 10.0
    shots_mean_stage: int = 100_000
    shots_vacuum_stage: int = 100_000
    seed: int = 0
    mle: MleOptions = field(default_factory=MleOptions)

    def __post_init__(self):
        if self.q_amplitude <= 0.0:
            raise ValueError("q_amplitude must be positive")
        if self.shots_mean_stage < 1 or self.shots_vacuum_stage < 1:
            raise ValueError("shot counts must be >= 1")


@dataclass
class CharacterizationResult:
    """Reconstructed channel with optimizer diagnostics."""

    amp_hat: np.ndarray
    noise_hat: np.ndarray
    disp_hat: np.ndarray
    loglik: float
    margin: float
    iterations: int
    converged: bool
    loglik_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    v_hat: np.ndarray | None = None

    @property
    def modes(self) -> int:
        return self.amp_hat.shape[0] // 2

    def channel(self) -> GaussianChannel:
        return GaussianChannel(self.amp_hat, self.noise_hat, self.disp_hat)


@dataclass(frozen=True)
class SettingVariances:
    """Per-setting sample variances and counts feeding the MLE."""

    settings: tuple
    variances: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        var = np.asarray(self.variances, dtype=float).copy()
        cnt = np.asarray(self.counts, dtype=float).copy()
        if len(self.settings) != var.size or var.size != cnt.size:
            raise InvalidDimensionError("settings, variances, and counts disagree in length")
        var.setflags(write=False)
        cnt.setflags(write=False)
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "variances", var)
        object.__setattr__(self, "counts", cnt)

    @classmethod
    def from_samples(cls, sample_sets: list[SampleSet]) -> "SettingVariances":
        settings = [s.setting for s in sample_sets]
        variances = np.array([s.variance() for s in sample_sets])
        counts = np.array([float(s.shots) for s in sample_sets])
        return cls(tuple(settings), variances, counts)

    @classmethod
    def from_covariance(cls, cov, counts: float = 1.0) -> "SettingVariances":
        """Exact setting variances w^T V w of a known covariance matrix."""
        cov = np.asarray(cov, dtype=float)
        settings = setting_catalog(cov.shape[0] // 2)
        variances = np.array([s.direction @ cov @ s.direction for s in settings])
        return cls(tuple(settings), variances, np.full(len(settings), float(counts)))

    def direction_matrix(self) -> np.ndarray:
        return np.array([s.direction for s in self.settings])


def estimate_modes_from_records(records: list[ProbeRecord]) -> int:
    if not records:
        raise ValueError("no probe records given")
    dim = records[0].input_mean.size
    if any(r.input_mean.size != dim for r in records):
        raise InvalidDimensionError("probe records have inconsistent dimensions")
    return dim // 2


def estimate_amp(records: list[ProbeRecord], q_amplitude: float, disp=None) -> np.ndarray:
    """Amplification matrix from one probe record per quadrature axis.

    Column n of the estimate is the measured response to probe n divided
    by the probe amplitude; a displacement estimate, when given, is
    subtracted from every response first.
    """
    if q_amplitude <= 0.0:
        raise ValueError(f"probe amplitude must be positive, got {q_amplitude}")
    modes = estimate_modes_from_records(records)
    dim = 2 * modes
    by_index = {}
    for record in records:
        if record.probe_index in by_index:
            raise ValueError(f"duplicate probe index {record.probe_index}")
        by_index[record.probe_index] = record
    expected = set(range(1, dim + 1))
    if set(by_index) != expected:
        missing = sorted(expected - set(by_index))
        extra = sorted(set(by_index) - expected)
        raise ValueError(
            f"need exactly one record per probe 1..{dim}; missing {missing}, unexpected {extra}"
        )
    offset = np.zeros(dim) if disp is None else np.asarray(disp, dtype=float)
    amp = np.empty((dim, dim))
    for n in range(1, dim + 1):
        amp[:, n - 1] = (by_index[n].measured_output_mean - offset) / q_amplitude
    return amp


def estimate_disp(zero_input_record: ProbeRecord) -> np.ndarray:
    """Displacement estimate: the measured output mean at zero input."""
    if np.any(zero_input_record.input_mean != 0.0):
        raise ValueError("displacement record must come from a vacuum (zero) input")
    return zero_input_record.measured_output_mean.copy()


def assemble_covariance(sample_sets: list[SampleSet]) -> np.ndarray:
    """Covariance matrix from the sample variances of a full catalog.

    Diagonal entries are single-quadrature variances; off-diagonals come
    from Var(a+b) = Var(a) + Var(b) + 2 Cov(a, b) applied to the pair
    settings. Unbiased (n-1) variances throughout; result symmetrized.
    """
    if not sample_sets:
        raise MissingSettingError(["<all settings>"])
    modes = sample_sets[0].setting.direction.size // 2
    by_label = {}
    for s in sample_sets:
        if s.setting.label in by_label:
            raise ValueError(f"duplicate setting {s.setting.label!r}")
        by_label[s.setting.label] = s.variance()
    required = [s.label for s in setting_catalog(modes)]
    missing = [label for label in required if label not in by_label]
    if missing:
        raise MissingSettingError(missing)

    dim = 2 * modes
    cov = np.zeros((dim, dim))
    for i in range(modes):
        cov[i, i] = by_label[f"x{i}"]
        cov[modes + i, modes + i] = by_label[f"p{i}"]
    for i in range(modes):
        for j in range(i + 1, modes):
            cxx = (by_label[f"x{i}+x{j}"] - cov[i, i] - cov[j, j]) / 2.0
            cov[i, j] = cov[j, i] = cxx
            cpp = (
                by_label[f"p{i}+p{j}"]
                - cov[modes + i, modes + i]
                - cov[modes + j, modes + j]
            ) / 2.0
            cov[modes + i, modes + j] = cov[modes + j, modes + i] = cpp
    for i in range(modes):
        for j in range(modes):
            cxp = (
                by_label[f"x{i}+p{j}"] - cov[i, i] - cov[modes + j, modes + j]
            ) / 2.0
            cov[i, modes + j] = cov[modes + j, i] = cxp
    return (cov + cov.T) / 2.0


def _feasibility_margin(noise: np.ndarray, k_imag: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(noise + 1j * k_imag)[0])


def _project_feasible(
    noise: np.ndarray, k_imag: np.ndarray, tol: float, max_iterations: int
) -> np.ndarray:
    """Nearest symmetric matrix N with N + i*k_imag PSD (Dykstra).

    Alternates PSD-cone and fixed-imaginary-part projections with the
    usual Dykstra correction terms; both sets are convex and intersect
    (a large multiple of the identity is always feasible).
    """
    if _feasibility_margin(noise, k_imag) >= 0.0:
        return noise
    x = noise + 1j * k_imag
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iterations):
        w, u = np.linalg.eigh(x + p)
        y = (u * np.clip(w, 0.0, None)) @ u.conj().T
        y = (y + y.conj().T) / 2.0
        p = x + p - y
        real_part = (y + q).real
        x_new = (real_part + real_part.T) / 2.0 + 1j * k_imag
        q = y + q - x_new
        gap = np.max(np.abs(x_new - y))
        x = x_new
        if gap <= tol * max(1.0, float(np.max(np.abs(x)))):
            break
    return x.real.copy()


def _log_likelihood(
    directions: np.ndarray, base: np.ndarray, noise: np.ndarray, data: SettingVariances
) -> float:
    model = base + np.einsum("ki,ij,kj->k", directions, noise, directions)
    model = np.maximum(model, VARIANCE_FLOOR)
    return float(
        np.sum(data.counts / 2.0 * (-np.log(model) - data.variances / model))
    )


def _gradient(
    directions: np.ndarray, base: np.ndarray, noise: np.ndarray, data: SettingVariances
) -> np.ndarray:
    raw = base + np.einsum("ki,ij,kj->k", directions, noise, directions)
    model = np.maximum(raw, VARIANCE_FLOOR)
    coef = data.counts * (data.variances - model) / (2.0 * model**2)
    # the floored likelihood is flat in directions where the raw variance
    # sits below the floor, so those settings contribute no gradient
    coef[raw < VARIANCE_FLOOR] = 0.0
    return (directions * coef[:, None]).T @ directions


def _least_squares_seed(
    directions: np.ndarray, base: np.ndarray, data: SettingVariances
) -> np.ndarray:
    """Unconstrained least-squares fit of the noise matrix to the variances.

    Solves the linear system <w_k w_k^T, N> = s2_k - base_k over symmetric
    matrices; with the standard catalog the system is square and the
    solution coincides with the direct covariance-combination estimate.
    """
    dim = directions.shape[1]
    iu = np.triu_indices(dim)
    design = np.empty((directions.shape[0], iu[0].size))
    for k, w in enumerate(directions):
        outer = np.outer(w, w)
        scale = 2.0 - (iu[0] == iu[1])
        design[k] = outer[iu] * scale
    target = data.variances - base
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    noise = np.zeros((dim, dim))
    noise[iu] = coeffs
    noise = noise + np.triu(noise, k=1).T
    return noise


def mle_noise(amp_hat, data, options: MleOptions | None = None) -> CharacterizationResult:
    """Physically constrained maximum-likelihood noise reconstruction.

    ``data`` is either a list of vacuum-stage :class:`SampleSet` or a
    :class:`SettingVariances`. Starts from the least-squares seed (shifted
    into the feasible cone if needed) and runs projected gradient ascent;
    the returned noise matrix always satisfies the physicality margin
    >= -1e-8, and the log-likelihood trace is non-decreasing.
    """
    options = options or MleOptions()
    amp_hat = np.asarray(amp_hat, dtype=float)
    if amp_hat.ndim != 2 or amp_hat.shape[0] != amp_hat.shape[1] or amp_hat.shape[0] % 2:
        raise InvalidDimensionError(
            f"amplification estimate must be square with even dimension, got {amp_hat.shape}"
        )
    if isinstance(data, SettingVariances):
        variances = data
    else:
        variances = SettingVariances.from_samples(list(data))
    directions = variances.direction_matrix()
    if directions.shape[1] != amp_hat.shape[0]:
        raise InvalidDimensionError(
            f"setting directions have length {directions.shape[1]}, expected {amp_hat.shape[0]}"
        )

    modes = amp_hat.shape[0] // 2
    om = omega(modes)
    k_imag = om - amp_hat @ om @ amp_hat.T
    k_imag = (k_imag - k_imag.T) / 2.0
    vacuum_gain = amp_hat @ amp_hat.T
    base = np.einsum("ki,ij,kj->k", directions, vacuum_gain, directions)

    noise = _least_squares_seed(directions, base, variances)
    margin = _feasibility_margin(noise, k_imag)
    if margin < 0.0:
        noise = noise + (abs(margin) + 1e-10) * np.eye(noise.shape[0])

    loglik = _log_likelihood(directions, base, noise, variances)
    trace = [loglik]
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        grad = _gradient(directions, base, noise, variances)
        step = 1.0
        # fast-forward the halving past steps far outside the sane model
        # scale; those trial points are never accepted and projecting them
        # is the dominant cost on ill-conditioned data
        grad_norm = float(np.linalg.norm(grad))
        bound = 100.0 * (1.0 + float(np.linalg.norm(noise)))
        while grad_norm * step > bound and step >= options.min_step:
            step /= 2.0
        accepted = False
        while step >= options.min_step:
            candidate = noise + step * grad
            candidate = _project_feasible(
                candidate, k_imag, options.dykstra_tol, options.dykstra_max_iterations
            )
            if _feasibility_margin(candidate, k_imag) < -1e-6:
                # projection did not reach the cone (hopeless trial point)
                step /= 2.0
                continue
            cand_loglik = _log_likelihood(directions, base, candidate, variances)
            predicted = float(np.sum(grad * (candidate - noise)))
            if cand_loglik >= loglik and cand_loglik >= loglik + options.armijo_c * predicted:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            converged = True
            break
        improvement = cand_loglik - loglik
        noise, loglik = candidate, cand_loglik
        trace.append(loglik)
        if improvement <= options.rel_tol * max(1.0, abs(loglik)):
            converged = True
            break

    # terminal projection: the margin guarantee must hold regardless of data
    margin = _feasibility_margin(noise, k_imag)
    if margin < MARGIN_GUARANTEE:
        noise = _project_feasible(
            noise, k_imag, options.dykstra_tol, 10 * options.dykstra_max_iterations
        )
        margin = _feasibility_margin(noise, k_imag)
        if margin < MARGIN_GUARANTEE:
            noise = noise + (abs(margin) + 1e-12) * np.eye(noise.shape[0])
            margin = _feasibility_margin(noise, k_imag)
        loglik = _log_likelihood(directions, base, noise, variances)

    noise = (noise + noise.T) / 2.0
    return CharacterizationResult(
        amp_hat=amp_hat.copy(),
        noise_hat=noise,
        disp_hat=np.zeros(amp_hat.shape[0]),
        loglik=loglik,
        margin=margin,
        iterations=iterations,
        converged=converged,
        loglik_trace=np.array(trace),
    )


def characterize(
    channel: GaussianChannel, options: ProtocolOptions | None = None
) -> CharacterizationResult:
    """End-to-end two-stage characterization of a channel under test.

    Coherent-probe stage -> displacement and amplification estimates;
    vacuum stage over the full setting catalog -> covariance assembly and
    constrained noise MLE. The channel is only accessed through the
    simulated measurements.
    """
    options = options or ProtocolOptions()
    modes = channel.modes

    zero_record = measure_vacuum_response(channel, options.shots_mean_stage, options.seed)
    disp_hat = estimate_disp(zero_record)

    probes = probe_sequence(modes, options.q_amplitude)
    records = measure_output_means(
        channel, probes, options.shots_mean_stage, options.seed
    )
    amp_hat = estimate_amp(records, options.q_amplitude, disp=disp_hat)

    samples = vacuum_stage_samples(channel, options.shots_vacuum_stage, options.seed)
    v_hat = assemble_covariance(samples)

    result = mle_noise(amp_hat, samples, options.mle)
    result.disp_hat = disp_hat
    result.v_hat = v_hat
    return result
