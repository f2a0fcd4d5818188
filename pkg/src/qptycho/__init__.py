"""Ptychographic reconstruction of pure quantum states.

Simulates rank-r "slicing" projections measured in the Fourier basis and
recovers the state with an iterative phase-retrieval engine; includes the
physical-optics forward model and Monte Carlo benchmarking campaigns.
"""

__version__ = "0.1.0"

from .campaign import (
    CampaignConfig,
    CampaignResult,
    NoiseSpec,
    TrialRecord,
    campaign_config_from_json,
    purity_sweep,
    run_campaign,
    run_trial,
    timing_fit_exponent,
)
from .forward_model import (
    DatasetParseError,
    Provenance,
    PtychographicDataset,
    assemble_dataset,
    dataset_from_state,
    export_csv,
    export_csv_path,
    ideal_probabilities,
    ingest_csv,
    mixed_probabilities,
    sample_counts,
)
from .hilbert import (
    dft_matrix,
    fidelity,
    haar_random_state,
    is_normalized,
    mix_with_white_noise,
    normalize,
    purity,
    qft,
    qft_inverse,
    weight_for_purity,
    white_noise_purity,
)
from .optics import (
    DetectorLayout,
    OpticalGeometry,
    default_geometry,
    detector_positions,
    envelope,
    envelope_bias,
    far_field_intensity,
    measurement_probabilities,
    near_field_intensity,
    sample_at_detectors,
)
from .pie import (
    PieConfig,
    ReconstructionResult,
    pie_sweep,
    reconstruct,
    residual,
    warm_up,
)
from .projectors import (
    FamilyKind,
    ProjectorFamily,
    RankProjector,
    apply_projector,
    build_family,
    family_from_json,
    family_to_json,
    validate_set,
)
