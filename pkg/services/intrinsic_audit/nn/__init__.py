"""
Neural Network Core
Minimal MLP engine owning all numerical computation of the simulator.
"""

from .mlp import (
    Batch,
    GradVector,
    MomentumState,
    ParamVector,
    SGDRun,
    evaluate,
    forward,
    init_params,
    loss_and_grad,
    num_params,
    predict,
    run_sgd,
    sgd_step,
    train_epochs,
    unflatten,
)

__all__ = [
    "Batch",
    "GradVector",
    "MomentumState",
    "ParamVector",
    "SGDRun",
    "evaluate",
    "forward",
    "init_params",
    "loss_and_grad",
    "num_params",
    "predict",
    "run_sgd",
    "sgd_step",
    "train_epochs",
    "unflatten",
]
