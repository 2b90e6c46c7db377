"""Statistical priors over human joint-angle pose vectors.

Fit, evaluate, and differentiate pose priors (multivariate normal,
per-dimension gamma, Gaussian mixtures, temporal mixtures over motion
deltas, soft box limits, and a VAE latent energy), analyze where a
normal prior misassigns probability mass, and use any prior to
regularize pose recovery from noisy observations.
"""

from .errors import DataError, NumericalError
from .linalg import CholFactor, EigenDecomp, cholesky, chol_solve, jacobi_eigen
from .pca import (
    Histogram1D,
    Normal1D,
    PcaModel,
    fit_normal_1d,
    fit_pca,
    histogram,
    infeasible_mass,
    reorient,
    restore,
)
from .posedata import (
    MotionSequence,
    PoseDataset,
    SynthSpec,
    TemporalDelta,
    axis_angle_to_matrices,
    compute_deltas,
    load_pose_csv,
    load_sequence_csv,
    matrices_to_axis_angle,
    save_pose_csv,
    save_sequence_csv,
    synth_generate,
    wrap_angle,
)
from .priors import (
    BoxLimitModel,
    GammaModel,
    GmmModel,
    MvnModel,
    TemporalGmmModel,
    box_from_data,
    fit_gamma,
    fit_gmm_em,
    fit_mvn,
    fit_temporal_gmm,
    mvn_from_moments,
)
from .recovery import Observation, RecoveryResult, recover_pose
from .vae import (
    LossWeights,
    TrainConfig,
    VaeEnergyPrior,
    VaeLossBreakdown,
    VaeModel,
    build_vae,
    decode,
    encode,
    kl_loss,
    project_to_rotations,
    reparameterize,
    total_loss,
    train,
    vae_prior_energy,
)
from .modelio import load_model, save_model

__version__ = "0.1.0"
