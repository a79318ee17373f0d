from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.optimize import minimize

from pfcross.algebra import AlgebraElement, Action, delta, involute, l1_norm, srw_element
from pfcross.checks import random_element
from pfcross.errors import PreconditionError
from pfcross.group import FreeGroup, ProductGroup
from pfcross.pnorm import (
    PExponent,
    TruncatedOperator,
    amplification_check,
    build_truncated,
    interpolation_bound,
    lp_norm,
    matrix_norms,
    monotonicity_scan,
    pf_norm,
    pnorm_anchor,
    pnorm_boyd,
    tensor_power_check,
    transpose_dual_check,
)

F2 = FreeGroup(2)


def radial_srw_ratio(x, p, k=2):
    """``||T x||_p / ||x||_p`` for SRW on F_k and a radial x given by sphere values.

    A point at length n >= 1 has one neighbour at n-1 and 2k-1 at n+1; the
    image lives on one more sphere than x.
    """
    q = 2 * k - 1
    x = np.abs(np.append(x, [0.0, 0.0]))
    R = len(x) - 2
    y = np.empty(R + 1)
    y[0] = x[1]
    y[1:] = (x[: R] + q * x[2 : R + 2]) / (2 * k)
    sizes = np.array([1] + [2 * k * q ** (n - 1) for n in range(1, R + 2)], dtype=float)
    return (sizes[: R + 1] @ y**p) ** (1 / p) / (sizes[:R] @ x[:R] ** p) ** (1 / p)


@pytest.mark.parametrize("p", [1.3, 2.0, 3.0])
def test_identity_operator(p):
    est = pf_norm(delta(F2), p, 3)
    assert est.lower == pytest.approx(1.0, abs=1e-12)
    assert est.upper == pytest.approx(1.0, abs=1e-12)


def test_left_translation_moves_the_identity_indicator():
    T = build_truncated(delta(F2, "a"), 3)
    x = T.zeros()
    x[0] = 1.0
    y = T.matvec(x)
    assert y[T.ball.index(F2.value("a"))].item() == 1.0
    assert np.count_nonzero(y) == 1


@pytest.mark.parametrize("R", [2, 4])
def test_column_anchor_equals_l1_for_positive_scalars(R):
    f = AlgebraElement.from_terms(F2, [("", 0.5), ("a", 2.0), ("bA", 1.5)])
    assert pnorm_anchor(build_truncated(f, R), 1.0) == pytest.approx(l1_norm(f), abs=1e-12)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 4.0])
def test_single_atom_has_norm_modulus(p):
    c = 1.5 - 2j
    est = pnorm_boyd(build_truncated(delta(F2, "aB", c), 4), p)
    assert est.lower == pytest.approx(abs(c), rel=1e-12)
    assert est.upper == pytest.approx(abs(c), rel=1e-12)


def test_zero_element():
    f = AlgebraElement.from_terms(F2, [("a", 0.0)])
    est = pnorm_boyd(build_truncated(f, 2), 1.5)
    assert (est.lower, est.upper) == (0.0, 0.0)


@pytest.fixture(scope="module")
def srw_p15_r10():
    return pnorm_boyd(build_truncated(srw_element(F2), 10), 1.5)


def test_srw_p15_matches_best_radial_witness(srw_p15_r10):
    est = srw_p15_r10
    p = 1.5
    x0 = 3.0 ** (-np.arange(10) / p)
    res = minimize(lambda x: -radial_srw_ratio(x, p), x0, method="Nelder-Mead", options={"maxiter": 20000, "xatol": 1e-12, "fatol": 1e-14})
    oracle = -res.fun
    assert est.lower >= oracle - 1e-6
    assert est.lower <= est.upper <= 1.0
    assert "upper-scope:truncation" in est.method


@pytest.mark.xfail(strict=True, reason="the best witness supported in ball(9) reaches 0.8596, just below 0.86")
def test_srw_p15_documented_lower_range(srw_p15_r10):
    assert srw_p15_r10.lower >= 0.86


def test_srw_near_one_is_reported():
    est = pf_norm(srw_element(F2), 1.01, 6)
    assert 0.95 <= est.lower <= est.upper <= 1.0


@pytest.mark.parametrize("p", [1.0, math.inf])
def test_power_method_needs_open_interval(p):
    with pytest.raises(PreconditionError):
        pnorm_boyd(build_truncated(srw_element(F2), 2), p)


def test_anchor_rejects_other_exponents():
    with pytest.raises(PreconditionError):
        pnorm_anchor(build_truncated(srw_element(F2), 2), 1.5)


def test_radius_must_cover_support():
    with pytest.raises(PreconditionError):
        build_truncated(delta(F2, "ab"), 1)


@pytest.mark.parametrize("p", [0.5, -1.0])
def test_exponent_below_one_rejected(p):
    with pytest.raises(PreconditionError):
        PExponent.of(p)


def test_interpolation_bound_examples():
    assert interpolation_bound(0.7, 0.7, 1.0, 3.0, 2.0) == 0.7
    assert interpolation_bound(2.0, 8.0, 1.0, math.inf, 2.0) == pytest.approx(4.0)
    assert interpolation_bound(2.0, 8.0, 1.0, 2.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        interpolation_bound(1.0, 1.0, 2.0, 1.0, 1.5)
    with pytest.raises(PreconditionError):
        interpolation_bound(1.0, 1.0, 1.0, 2.0, 3.0)


def test_riesz_thorin_on_random_dense_matrices():
    rng = np.random.default_rng(11)
    for _ in range(50):
        M = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
        n = matrix_norms(M)
        assert n["2"] == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)
        assert n["2"] <= math.sqrt(n["1"] * n["inf"]) * (1 + 1e-12)


def test_two_norm_below_max_anchor_on_random_sparse_matrices():
    rng = np.random.default_rng(12)
    for i in range(100):
        M = sp.random(30, 30, density=0.1, random_state=rng, format="csr")
        n = matrix_norms(M)
        assert n["2"] <= max(n["1"], n["inf"]) * (1 + 1e-12)


def test_transpose_duality():
    f = random_element(F2, 2, np.random.default_rng(5), 5, complex_=True)
    Tf, Ts = TruncatedOperator(f, 4), TruncatedOperator(involute(f), 4)
    rep = transpose_dual_check(Tf, Ts, 1.0)
    assert rep["difference"] < 1e-12 and rep["passed"]
    rep = transpose_dual_check(Tf, Ts, 2.0)
    assert rep["difference"] <= 1e-9
    with pytest.raises(PreconditionError):
        transpose_dual_check(Tf, Tf, 2.0)


def test_transpose_duality_single_atom():
    f = delta(F2, "b")
    rep = transpose_dual_check(TruncatedOperator(f, 3), TruncatedOperator(involute(f), 3), 1.5)
    assert rep["lhs"][0] == pytest.approx(1.0) and rep["rhs"][0] == pytest.approx(1.0)


def test_self_adjoint_element_is_symmetric_in_p_and_q():
    f = srw_element(F2) + delta(F2, "", 0.3)
    assert f.allclose(involute(f))
    T = build_truncated(f, 6)
    a, b = pnorm_boyd(T, 1.5), pnorm_boyd(T, 3.0)
    assert max(a.lower, b.lower) <= min(a.upper, b.upper) + 1e-9
    assert abs(a.lower - b.lower) <= 0.02


def test_lower_bound_grows_with_radius():
    lowers = [pnorm_boyd(build_truncated(srw_element(F2), R), 1.5).lower for R in (3, 4, 5, 6)]
    assert all(b >= a - 1e-9 for a, b in zip(lowers, lowers[1:])), lowers


def test_estimate_is_seed_deterministic():
    T = build_truncated(srw_element(F2) + delta(F2, "ab", 0.2), 5)
    a, b = pnorm_boyd(T, 1.7, seed=4), pnorm_boyd(T, 1.7, seed=4)
    assert a.to_dict() == b.to_dict()


def test_monotonicity_of_single_atom_curve():
    rep = monotonicity_scan(delta(F2, "a"), [1.2, 1.6, 2.0], radius=3)
    assert rep["passed"]
    assert all(pt["lower"] == pytest.approx(1.0) for pt in rep["curve"])


def test_amplification_examples():
    f = srw_element(F2)
    assert amplification_check(f, 1, 1.5, 3)["ratio"] == pytest.approx(1.0, abs=1e-12)
    assert amplification_check(f, 3, 2.0, 4)["ratio"] == pytest.approx(1.0, abs=1e-9)
    rep = amplification_check(f, 4, 1.5, 4, restarts=4)
    assert rep["direction_holds"]
    assert rep["ratio"] == pytest.approx(1.0, abs=1e-3)


def test_amplification_with_matrix_coefficients():
    f = random_element(F2, 1, np.random.default_rng(9), 3, Action.swap(F2, 2))
    assert amplification_check(f, 2, 1.5, 3, restarts=4)["direction_holds"]


def test_tensor_power_examples():
    rep = tensor_power_check(delta(F2, "a"), {"": [1.0]}, 1.5)
    assert rep["lhs"] == pytest.approx(1.0) and rep["rhs"] == pytest.approx(1.0)
    f = AlgebraElement.from_terms(F2, [("a", 2.0), ("b", -1.0j), ("", 0.5)])
    rep = tensor_power_check(f, {"": [1.0]}, 1.5)
    norm_f = (2.0**1.5 + 1.0 + 0.5**1.5) ** (1 / 1.5)
    assert rep["lhs"] == pytest.approx(norm_f**2, rel=1e-12)
    assert rep["passed"]


def test_tensor_power_uses_product_group_and_rejects_matrices():
    with pytest.raises(PreconditionError):
        tensor_power_check(delta(F2, "a", np.eye(2), dim=2), {"": [1.0]}, 1.5)
    with pytest.raises(PreconditionError):
        tensor_power_check(delta(F2, "ab"), {"ab": [1.0]}, 1.5, radius=2)
    assert isinstance(ProductGroup((F2, F2)), ProductGroup)


def test_lp_norm_handles_infinity_and_blocks():
    x = np.array([[[3.0], [4.0]], [[0.0], [1.0]]])
    assert lp_norm(x, 1.0) == pytest.approx(6.0)
    assert lp_norm(x, math.inf) == pytest.approx(5.0)
