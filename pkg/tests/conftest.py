import numpy as np
import pytest

from services.intrinsic_audit import AdversaryPolicy, DataConfig, ProtocolConfig
from services.intrinsic_audit.data import gen_synthetic
from services.intrinsic_audit.nn import Batch, init_params
from services.intrinsic_audit.schemas import ModelSpec


TINY_DATA = DataConfig(
    num_classes=4,
    channels=1,
    height=4,
    width=4,
    train_count=240,
    test_count=60,
    partition="iid",
)


def tiny_config(**overrides) -> ProtocolConfig:
    """A federation small enough to run many rounds in well under a second"""
    values = dict(
        n_clients=4,
        total_rounds=8,
        lr=0.05,
        trigger_lr=0.5,
        boost=4.0,
        batch_size=16,
        local_epochs=1,
        trigger_epochs=2,
        finetune_epochs=1,
        warmup_rounds=0,
        hidden_dims=(8,),
        data=TINY_DATA,
    )
    values.update(overrides)
    return ProtocolConfig(**values)


@pytest.fixture
def cfg() -> ProtocolConfig:
    return tiny_config()


@pytest.fixture
def omit_all_cfg() -> ProtocolConfig:
    return tiny_config(policy=AdversaryPolicy(kind="omit", rho=0.25, epsilon=1.0))


@pytest.fixture
def spec() -> ModelSpec:
    return ModelSpec(layer_dims=(6, 5, 3))


@pytest.fixture
def params(spec):
    return init_params(spec, seed=7)


@pytest.fixture
def batch() -> Batch:
    rng = np.random.default_rng(3)
    return Batch(rng.normal(size=(12, 6)), rng.integers(0, 3, size=12))


@pytest.fixture
def dataset():
    return gen_synthetic(4, (1, 4, 4), 120, seed=11)
