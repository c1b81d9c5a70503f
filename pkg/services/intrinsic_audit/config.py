"""
Intrinsic Audit Configuration
Contains all default values and thresholds used across the simulator.
"""

# Federated training defaults (desk-scale rendition of the reference setup)
PROTOCOL_DEFAULTS = {
    "n_clients": 10,
    "total_rounds": 50,
    "lr": 0.01,  # clean learning rate eta
    "trigger_lr": 0.1,  # amplified trigger learning rate eta_tau
    "boost": 10.0,  # boosting factor alpha
    "gamma": 0.7,  # ASR acceptance threshold
    "batch_size": 32,
    "momentum": 0.9,
    "local_epochs": 1,
    "trigger_epochs": 30,  # cap on trigger-training passes
    "trigger_stop_asr": 1.0,  # trigger training stops once the proof reaches this ASR
    "trigger_momentum": 0.0,
    "trigger_clean_ratio": 1.0,  # clean anchors per trigger example
    "finetune_epochs": 10,
    "seed": 0,
    "warmup_rounds": 5,
    "verification": True,
    "log_client_asr": True,
    "workers": 1,
}

# Model family defaults
MODEL_DEFAULTS = {
    "hidden_dims": (64,),
    "activation": "relu",
}

# Synthetic dataset and partitioning defaults
DATA_DEFAULTS = {
    "num_classes": 10,
    "channels": 3,
    "height": 8,
    "width": 8,
    "train_count": 2000,
    "test_count": 500,
    "noise_std": 0.1,
    "prototype_low": 0.1,
    "prototype_high": 0.9,
    "partition": "dirichlet",
    "dirichlet_beta": 0.5,
    "trigger_fraction": 0.1,
    "patch_size": 2,
    "max_partition_attempts": 100,
}

# Server behaviour defaults
ADVERSARY_DEFAULTS = {
    "kind": "honest",
    "rho": 0.1,
    "epsilon": 1.0,
    "tamper_mode": "zero",
    "tamper_magnitude": 1.0,
}

# Desk-scale acceptance thresholds
ACCEPTANCE_THRESHOLDS = {
    "honest_accept_rate": 0.90,
    "false_alarm_rate": 0.10,
    "spatial_interference_rate": 0.05,
    "forgotten_fraction": 0.90,
    "utility_gap": 0.02,
    "chance_margin": 0.15,
    "monte_carlo_std_errors": 4.0,
}

# Exit codes of the command-line surface
EXIT_CODES = {
    "ok": 0,
    "config_error": 1,
    "detection": 2,
}

# Numerical guards
NUMERIC_CONFIG = {
    "monte_carlo_elements": 2_000_000,  # random keys held per Monte Carlo chunk
    "csv_float_format": "%.6f",
}

# Verdict descriptions used in reports
VERDICT_DESCRIPTIONS = {
    "accept": "Verifier found its proof in the aggregated model",
    "reject": "Verifier's proof missing from the aggregated model",
    "skipped": "No proof injected this round",
}

# Artifact column layouts
CSV_SCHEMAS = {
    "rounds": ["round", "verifier_id", "asr", "verdict", "clean_acc", "omitted_ids"],
    "summary": ["metric", "value"],
    "sweep": [
        "value",
        "attacked_rounds",
        "detected_rounds",
        "honest_accept_rate",
        "final_finetuned_accuracy",
        "any_reject",
    ],
    "detect_prob": [
        "rho",
        "k",
        "analytic_prob",
        "monte_carlo_prob",
        "trials",
        "std_error",
        "effective_analytic_prob",
    ],
}
