"""Gaussian simulation and optimization of continuous-variable teleportation
through asymmetrically decohered two-mode squeezed channels."""

from .channel import (
    ChannelMoments,
    ChannelParams,
    SeparabilityVerdict,
    channel_moments,
    channel_state,
    epr_scaled_variances,
    is_separable,
    normalized_interaction_time,
    separability_threshold,
)
from .gaussian import (
    DegenerateMeasurementError,
    GaussianState,
    apply_beam_splitter,
    apply_displacement,
    apply_loss,
    characteristic_function,
    coherent_state,
    displacement_via_beam_splitter,
    gaussian_overlap_fidelity,
    homodyne_condition,
    homodyne_sample,
    quadrature_form_variance,
    two_mode_squeezed_vacuum,
    vacuum_state,
    wigner,
)
from .optimize import (
    OptimumResult,
    maximize_scalar,
    optimal_gain,
    optimal_receiver_transmittance,
    optimal_squeezing,
)
from .teleport import (
    FidelityReport,
    ProtocolConfig,
    UnphysicalMomentsError,
    analytic_average_fidelity,
    average_output_state,
    fidelity_for_gain,
    lossy_sender_fidelity,
    mc_fidelity,
    teleport_coherent_once,
)

__version__ = "0.1.0"
