"""
Feed-forward Network Engine
Fixed-family MLP with exact backpropagation and momentum SGD over flat parameter vectors.

Parameter layout: for each layer in order, the weight matrix (fan_in x fan_out,
row-major) followed by the bias vector (fan_out).
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..errors import EmptyDataError, NumericalError, ShapeMismatchError
from ..schemas import ModelSpec


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.float64, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Flat model parameters conforming to ``spec``"""

    values: np.ndarray
    spec: ModelSpec

    def __post_init__(self):
        values = _frozen(np.ravel(self.values))
        if values.size != self.spec.num_params:
            raise ShapeMismatchError(
                f"expected {self.spec.num_params} parameters, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite model parameters")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values: np.ndarray) -> "ParamVector":
        return ParamVector(values, self.spec)


@dataclass(frozen=True, eq=False)
class GradVector:
    """Gradient (or effective update direction) aligned with a ParamVector"""

    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.ravel(self.values))
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite gradient")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def zeros(cls, length: int) -> "GradVector":
        return cls(np.zeros(length))


@dataclass(frozen=True, eq=False)
class MomentumState:
    """Classical momentum buffer"""

    velocity: np.ndarray
    coefficient: float

    def __post_init__(self):
        if not 0.0 <= self.coefficient < 1.0:
            raise ValueError(f"momentum coefficient {self.coefficient} outside [0, 1)")
        object.__setattr__(self, "velocity", _frozen(np.ravel(self.velocity)))

    @classmethod
    def fresh(cls, length: int, coefficient: float) -> "MomentumState":
        return cls(np.zeros(length), coefficient)


@dataclass(frozen=True, eq=False)
class Batch:
    """Flattened inputs (N x D) with integer labels (N)"""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if inputs.shape[0] != labels.shape[0]:
            raise ShapeMismatchError(
                f"{inputs.shape[0]} inputs but {labels.shape[0]} labels"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def subset(self, index: np.ndarray) -> "Batch":
        return Batch(self.inputs[index], self.labels[index])

    def concat(self, other: "Batch") -> "Batch":
        return Batch(
            np.concatenate([self.inputs, other.inputs]),
            np.concatenate([self.labels, other.labels]),
        )


def num_params(spec: ModelSpec) -> int:
    return spec.num_params


def unflatten(params: ParamVector) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split the flat vector into per-layer (W, b) views"""
    layers = []
    offset = 0
    dims = params.spec.layer_dims
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weight = params.values[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        bias = params.values[offset : offset + fan_out]
        offset += fan_out
        layers.append((weight, bias))
    return layers


def init_params(spec: ModelSpec, seed: int) -> ParamVector:
    """
    Fan-in scaled uniform initialization.

    Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases are exactly zero.
    """
    if any(d <= 0 for d in spec.layer_dims):
        raise ShapeMismatchError(f"degenerate layer size in {spec.layer_dims}")
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_in, fan_out in zip(spec.layer_dims[:-1], spec.layer_dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return ParamVector(np.concatenate(chunks), spec)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_grad(z: np.ndarray, a: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (z > 0.0).astype(np.float64)
    return 1.0 - a * a


def _forward_pass(
    params: ParamVector, inputs: np.ndarray
) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
    """Logits plus the pre-activations and activations needed for backprop"""
    if inputs.shape[-1] != params.spec.input_dim:
        raise ShapeMismatchError(
            f"input dim {inputs.shape[-1]} != model input {params.spec.input_dim}"
        )
    layers = unflatten(params)
    activations = [inputs]
    pre_activations = []
    a = inputs
    for idx, (weight, bias) in enumerate(layers):
        z = a @ weight + bias
        pre_activations.append(z)
        if idx < len(layers) - 1:
            a = _activate(z, params.spec.activation)
            activations.append(a)
        else:
            a = z
    return a, pre_activations, activations


def forward(params: ParamVector, x: np.ndarray) -> np.ndarray:
    """Logits for a single feature vector"""
    x = np.asarray(x, dtype=np.float64).ravel()
    logits, _, _ = _forward_pass(params, x[None, :])
    logits = logits[0]
    if not np.all(np.isfinite(logits)):
        raise NumericalError("non-finite logits")
    return logits


def predict(params: ParamVector, inputs: np.ndarray) -> np.ndarray:
    """Argmax classes for a batch of inputs; ties go to the lowest index"""
    logits, _, _ = _forward_pass(params, np.atleast_2d(np.asarray(inputs, dtype=np.float64)))
    return np.argmax(logits, axis=1)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _check_labels(params: ParamVector, batch: Batch) -> None:
    if len(batch) == 0:
        raise EmptyDataError("empty batch")
    if batch.labels.min() < 0 or batch.labels.max() >= params.spec.num_classes:
        raise ShapeMismatchError("label outside the model's class range")


def loss_and_grad(params: ParamVector, batch: Batch) -> Tuple[float, GradVector]:
    """
    Mean cross-entropy over the batch and its exact gradient.

    Args:
        params: model parameters
        batch: nonempty labelled batch

    Returns:
        Tuple of (loss, gradient)
    """
    _check_labels(params, batch)
    logits, pre_activations, activations = _forward_pass(params, batch.inputs)
    log_probs = _log_softmax(logits)
    n = len(batch)
    rows = np.arange(n)
    loss = float(-log_probs[rows, batch.labels].mean())
    if not np.isfinite(loss):
        raise NumericalError("non-finite loss")

    delta = np.exp(log_probs)
    delta[rows, batch.labels] -= 1.0
    delta /= n

    layers = unflatten(params)
    grads: List[np.ndarray] = [None] * (2 * len(layers))
    for idx in range(len(layers) - 1, -1, -1):
        weight, _ = layers[idx]
        grads[2 * idx] = (activations[idx].T @ delta).ravel()
        grads[2 * idx + 1] = delta.sum(axis=0)
        if idx > 0:
            delta = (delta @ weight.T) * _activation_grad(
                pre_activations[idx - 1], activations[idx], params.spec.activation
            )

    return loss, GradVector(np.concatenate(grads))


def sgd_step(
    params: ParamVector, grad: GradVector, lr: float, state: MomentumState
) -> Tuple[ParamVector, MomentumState]:
    """One classical-momentum step: v <- mu*v + g ; theta <- theta - lr*v"""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if not (len(params) == len(grad) == state.velocity.size):
        raise ShapeMismatchError(
            f"lengths differ: params={len(params)} grad={len(grad)} "
            f"velocity={state.velocity.size}"
        )
    velocity = state.coefficient * state.velocity + grad.values
    return (
        params.with_values(params.values - lr * velocity),
        MomentumState(velocity, state.coefficient),
    )


@dataclass(frozen=True, eq=False)
class SGDRun:
    """Outcome of a run of mini-batch SGD"""

    params: ParamVector
    state: MomentumState
    # sum of the velocities applied: final = start - lr * displacement
    displacement: np.ndarray
    steps: int


def run_sgd(
    params: ParamVector,
    data: Batch,
    lr: float,
    epochs: int,
    batch_size: int,
    state: MomentumState,
    rng: Optional[np.random.Generator] = None,
    stop_when: Optional[Callable[[ParamVector], bool]] = None,
) -> SGDRun:
    """
    Mini-batch SGD for up to ``epochs`` passes over ``data``.

    The example order is reshuffled each epoch from ``rng``; without one the
    data is visited in its stored order. ``stop_when`` is checked after every
    step and ends the run early once it holds.
    """
    if len(data) == 0:
        raise EmptyDataError("no training data")
    displacement = np.zeros(len(params))
    steps = 0
    for _ in range(epochs):
        order = rng.permutation(len(data)) if rng is not None else np.arange(len(data))
        for start in range(0, len(data), batch_size):
            _, grad = loss_and_grad(params, data.subset(order[start : start + batch_size]))
            params, state = sgd_step(params, grad, lr, state)
            displacement += state.velocity
            steps += 1
            if stop_when is not None and stop_when(params):
                return SGDRun(params, state, displacement, steps)
    return SGDRun(params, state, displacement, steps)


def train_epochs(
    params: ParamVector,
    data: Batch,
    lr: float,
    epochs: int,
    batch_size: int,
    state: MomentumState,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[ParamVector, MomentumState]:
    """``run_sgd`` without early stopping, keeping only the model and optimizer state"""
    run = run_sgd(params, data, lr, epochs, batch_size, state, rng)
    return run.params, run.state


def evaluate(params: ParamVector, data: Batch) -> Tuple[float, float]:
    """Returns (accuracy, mean cross-entropy)"""
    _check_labels(params, data)
    logits, _, _ = _forward_pass(params, data.inputs)
    log_probs = _log_softmax(logits)
    accuracy = float(np.mean(np.argmax(logits, axis=1) == data.labels))
    mean_loss = float(-log_probs[np.arange(len(data)), data.labels].mean())
    return accuracy, mean_loss
