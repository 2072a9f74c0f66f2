"""Certified learnability toolkit.

Weight-space Gaussian smoothing certificates for unlearnable datasets, plus
the crafting and attack harnesses around them. The heavy lifting lives in the
compiled ``_core`` module; this package re-exports its public surface.
"""

from ._core import (  # noqa: F401
    AccuracySamples,
    BlobSpec,
    Certificate,
    ClasswisePerturbation,
    CraftConfig,
    CraftResult,
    LabeledDataset,
    LcertError,
    ModelSpec,
    ParamVector,
    RecoveryConfig,
    SmoothingConfig,
    TrainConfig,
    __version__,
    accuracy,
    apply_perturbation,
    binomial_cdf,
    certify_learnability,
    craft,
    empirical_qps,
    estimate_true_learnability,
    hoeffding_addend,
    hoeffding_addend_1n,
    hoeffding_generalization,
    init_params,
    make_blobs,
    max_certifiable_eta,
    pac_bayes_lower_bound,
    perturb_params,
    project_l2,
    q_bar,
    quantile_upper_bound,
    recovery_attack,
    sample_accuracies,
    tightness_gap,
    train,
    train_offline_surrogate,
    validate_certificate,
)
