"""Synthetic monitoring environments: procedurally generated continuous
control tasks with measure-preserving dynamics and a known optimal policy.
"""

__version__ = "0.1.0"

from .config import (ConfigError, DEFAULTS, EnvConfig, FORMAT_VERSION,
                     validate_config)
from .errors import (DatasetFormatError, DimensionError, EpisodeError,
                     ManifestError, ShellSamplingError)
from .rng import RandomStream, derive_stream
from .kernel import (TransitionKernel, init_kernel, step_transition,
                     step_transition_batch, triangle_wave)
from .policy import (DUNPolicy, UniformLayer, build_policy, layer_forward,
                     optimal_action, optimal_actions, std_normal_cdf)
from .rewards import (RewardLedger, StepOutcome, accumulate_and_payout,
                      augment_observation, check_termination, compute_regret,
                      step_reward)
from .environment import (Environment, EpisodeStats, RolloutSummary,
                          create_environment, load_manifest, reset, rollout,
                          save_manifest, step)
from .evaluation import (CategoryResult, DEFAULT_EXPANSIONS, EvalReport,
                         ShellPartition, evaluate_policy, expansion_level,
                         report_csv_bytes, report_json_doc, sample_shell)
from .offline import (BehaviorPolicy, Dataset, DatasetSummary, DatasetWriter,
                      behavior_action, behavior_policy, collect_dataset,
                      merge_datasets, read_dataset, record_dtype,
                      write_dataset)
from .verification import (CheckResult, VerificationBudget, ks_statistic,
                           ks_critical_value, spectral_norm,
                           verify_environment)

__all__ = [
    "BehaviorPolicy", "CategoryResult", "CheckResult", "ConfigError",
    "DEFAULTS", "DEFAULT_EXPANSIONS", "DUNPolicy", "Dataset",
    "DatasetFormatError", "DatasetSummary", "DatasetWriter", "DimensionError",
    "EnvConfig", "Environment", "EpisodeError", "EpisodeStats", "EvalReport",
    "FORMAT_VERSION", "ManifestError", "RandomStream", "RewardLedger",
    "RolloutSummary", "ShellPartition", "ShellSamplingError", "StepOutcome",
    "TransitionKernel", "UniformLayer", "VerificationBudget",
    "accumulate_and_payout", "augment_observation", "behavior_action",
    "behavior_policy", "build_policy", "check_termination", "collect_dataset",
    "compute_regret", "create_environment", "derive_stream",
    "evaluate_policy", "expansion_level", "init_kernel", "ks_critical_value",
    "ks_statistic", "layer_forward", "load_manifest", "merge_datasets",
    "optimal_action", "optimal_actions", "read_dataset", "record_dtype",
    "report_csv_bytes", "report_json_doc", "reset", "rollout",
    "sample_shell", "save_manifest", "spectral_norm", "std_normal_cdf",
    "step", "step_reward", "step_transition", "step_transition_batch",
    "triangle_wave", "validate_config", "verify_environment",
    "write_dataset",
]
