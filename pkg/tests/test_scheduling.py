import pytest
from hypothesis import given
from hypothesis import strategies as st

from services.intrinsic_audit.components import (
    SchedulingToken,
    assign_tokens,
    is_verifier,
    verifier_for_round,
)


@given(n=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_tokens_are_a_permutation(n, seed):
    tokens = assign_tokens(n, seed)
    assert sorted(t.value for t in tokens) == list(range(n))


@given(n=st.integers(1, 40), seed=st.integers(0, 1000), round_idx=st.integers(0, 10_000))
def test_exactly_one_verifier_per_round(n, seed, round_idx):
    tokens = assign_tokens(n, seed)
    assert sum(is_verifier(t, round_idx, n) for t in tokens) == 1


def test_every_client_verifies_once_per_cycle():
    tokens = assign_tokens(10, seed=3)
    assert sorted(verifier_for_round(tokens, t) for t in range(10)) == list(range(10))
    assert [verifier_for_round(tokens, t) for t in range(10)] == [
        verifier_for_round(tokens, t + 10) for t in range(10)
    ]


def test_single_client_always_verifies():
    (token,) = assign_tokens(1, seed=0)
    assert all(is_verifier(token, t, 1) for t in range(5))


def test_negative_round_is_rejected():
    with pytest.raises(ValueError):
        is_verifier(SchedulingToken(0), -1, 3)


def test_broken_token_set_is_detected():
    with pytest.raises(ValueError):
        verifier_for_round([SchedulingToken(0), SchedulingToken(0)], 1)


def test_assign_tokens_needs_a_client():
    with pytest.raises(ValueError):
        assign_tokens(0, seed=0)
