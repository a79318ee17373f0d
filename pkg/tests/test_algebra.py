from __future__ import annotations

import json

import numpy as np
import pytest

from pfcross.algebra import (
    Action,
    AlgebraElement,
    convolve,
    delta,
    element_from_json,
    element_to_json,
    involute,
    l1_norm,
    srw_element,
)
from pfcross.checks import random_element
from pfcross.errors import PreconditionError, StructuralError
from pfcross.group import CyclicGroup, FreeGroup

F2 = FreeGroup(2)
SIGMA = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_delta_products():
    assert convolve(delta(F2, "a"), delta(F2, "b")).allclose(delta(F2, "ab"))
    f = random_element(F2, 2, np.random.default_rng(0), 5, complex_=True)
    assert convolve(delta(F2), f).allclose(f)


def test_swap_action_convolution_by_hand():
    act = Action.swap(F2, 2)
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    N = np.array([[0.0, 1j], [5.0, -1.0]])
    out = convolve(delta(F2, "a", M, action=act), delta(F2, "a", N, action=act))
    assert out.support == [F2.value("aa")]
    assert np.allclose(out.coefficient("aa"), M @ SIGMA @ N @ SIGMA)


def test_involution_examples():
    assert involute(delta(F2)).allclose(delta(F2))
    assert involute(delta(F2, "aB", 2 - 3j)).allclose(delta(F2, "bA", 2 + 3j))


def test_swap_action_involution_by_hand():
    act = Action.swap(F2, 2)
    M = np.array([[1.0, 2j], [3.0, 4.0]])
    out = involute(delta(F2, "a", M, action=act))
    # f*(s) = alpha_s(f(s^-1)^*) with alpha conjugation by sigma
    assert np.allclose(out.coefficient("A"), SIGMA @ M.conj().T @ SIGMA)


@pytest.mark.parametrize("seed", range(5))
def test_involution_is_anti_multiplicative(seed):
    rng = np.random.default_rng(seed)
    act = Action.swap(F2, 2)
    f, g = (random_element(F2, 2, rng, 3, act, complex_=True) for _ in range(2))
    assert involute(f * g).allclose(involute(g) * involute(f), 1e-10)
    assert involute(involute(f)).allclose(f)


def test_l1_norm_examples():
    assert l1_norm(delta(F2)) == 1.0
    assert abs(l1_norm(srw_element(F2)) - 1.0) < 1e-15
    f = AlgebraElement.from_terms(F2, [("a", 2.0), ("b", -3.0)])
    assert l1_norm(f) == 5.0


def test_zero_terms_are_dropped():
    f = AlgebraElement.from_terms(F2, [("a", 1.0), ("a", -1.0)])
    assert f.is_zero


def test_mismatched_elements_rejected():
    with pytest.raises(StructuralError):
        delta(F2, "a") * delta(FreeGroup(3), "a")
    with pytest.raises(StructuralError):
        delta(F2, "a") + delta(F2, "a", np.eye(2), dim=2)


def test_action_must_respect_relations():
    with pytest.raises(PreconditionError):
        Action.swap(CyclicGroup(3), 2)
    Action.swap(CyclicGroup(4), 2)


def test_json_roundtrip():
    act = Action.swap(F2, 2)
    f = random_element(F2, 2, np.random.default_rng(3), 4, act, complex_=True)
    g = element_from_json(json.dumps(element_to_json(f)))
    assert g.action == f.action
    assert g.allclose(f, 0.0)


def test_malformed_json_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        element_from_json({"group": "free:2", "terms": [{"re": 1.0}]})
