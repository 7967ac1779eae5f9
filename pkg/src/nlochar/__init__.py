"""Multimode bosonic Gaussian channel simulation, characterization, and analysis."""

from .analysis import (
    EigenAnalysis,
    EigenprobeReport,
    ModeAmplitudePhase,
    noise_eigendecomposition,
    predict_output,
    svd_channel,
    to_amplitude_phase,
    verify_eigenquadratures,
)
from .channels import (
    DfgSpec,
    GraphSpec,
    LossSpec,
    classical_noise_channel,
    cluster_channel,
    dfg_array,
    interferometer_symplectic,
    loss_channel,
    noise_squeeze_for_ppt_target,
    nullifier_variances,
    pairwise_rotation,
    quantum_noise_channel,
    squeeze_for_loss_ppt_target,
    two_mode_squeezer,
)
from .characterization import (
    CharacterizationResult,
    MleOptions,
    ProtocolOptions,
    SettingVariances,
    assemble_covariance,
    characterize,
    estimate_amp,
    estimate_disp,
    mle_noise,
)
from .core import (
    ComplexChannelPair,
    GaussianChannel,
    GaussianState,
    apply_channel,
    coherent_state,
    compose,
    from_amp_matrix,
    identity_channel,
    omega,
    physicality_margin,
    ppt_min_eigenvalue,
    reduced_covariance,
    state_physicality,
    symplectic_eigenvalues,
    to_amp_matrix,
    vacuum_state,
)
from .measurement import (
    MeasurementSetting,
    ProbeRecord,
    SampleSet,
    measure_output_means,
    measure_vacuum_response,
    probe_sequence,
    sample_quadrature,
    setting_catalog,
    vacuum_stage_samples,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
