from __future__ import annotations

import math

import numpy as np
import pytest

from pfcross.boundary import harmonic_measure
from pfcross.criteria import (
    WeightFunction,
    criteria_report,
    gibbs_bound_check,
    gram_matrix,
    psd_gram_check,
    weight_membership,
)
from pfcross.errors import PreconditionError
from pfcross.group import FreeGroup
from pfcross.walks import Measure, lazy_measure, srw_measure

F2 = FreeGroup(2)
LOG3 = math.log(3)


def test_phi_series_value():
    rep = weight_membership(WeightFunction("phi_beta", 0.5), 2.0, 2)
    assert rep["convergent"]
    assert rep["sum"] == pytest.approx(5.0, abs=1e-9)


@pytest.mark.parametrize("k, p", [(2, 2.0), (3, 1.5), (4, 3.0)])
def test_phi_threshold_is_divergent(k, p):
    beta = (2 * k - 1) ** (-1.0 / p)
    rep = weight_membership(WeightFunction("phi_beta", beta), p, k)
    assert not rep["convergent"] and rep["sum"] == "inf"
    assert rep["ratio"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 5.0])
def test_omega_always_divergent(alpha):
    assert not weight_membership(WeightFunction("omega_alpha", alpha), 2.0, 2)["convergent"]


def test_xi_power_membership_follows_exponent():
    assert weight_membership(WeightFunction("xi_power", 1.0), 2.5, 2)["convergent"]
    assert not weight_membership(WeightFunction("xi_power", 1.0), 2.0, 2)["convergent"]


@pytest.mark.parametrize(
    "kind, param",
    [("phi_beta", 0.0), ("phi_beta", 1.0), ("omega_alpha", -1.0), ("sigma", 1.0)],
)
def test_weight_parameter_domains(kind, param):
    with pytest.raises(PreconditionError):
        WeightFunction(kind, param)


def test_constant_gram_is_all_ones():
    M = gram_matrix(WeightFunction("constant"), F2, 2)
    assert np.array_equal(M, np.ones((17, 17)))
    rep = psd_gram_check(WeightFunction("constant"), F2, 2)
    assert rep["min_eigenvalue"] == pytest.approx(0.0, abs=1e-12)
    assert rep["passed"]


def test_xi_gram_with_boundary_measure_matches_closed_form():
    nu = harmonic_measure(srw_measure(F2))
    a = gram_matrix(WeightFunction("xi_power", 1.0, nu), F2, 2)
    b = gram_matrix(WeightFunction("xi_power", 1.0), F2, 2)
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_biased_xi_gram_is_positive():
    mu = Measure.from_terms(F2, [("a", 0.5), ("A", 1 / 6), ("b", 1 / 6), ("B", 1 / 6)])
    rep = psd_gram_check(WeightFunction("xi_power", 1.0, harmonic_measure(mu)), F2, 2)
    assert rep["passed"] and rep["symmetric"]


def test_gibbs_constant_weight_is_kl_to_uniform():
    rep = gibbs_bound_check(srw_measure(F2), 3, WeightFunction("constant"))
    h_max = math.log(rep["support_superset_size"])
    assert rep["divergence"] == pytest.approx(h_max - rep["H_n"], abs=1e-12)
    assert rep["bound"] == pytest.approx(h_max, abs=1e-12)


def test_divergence_of_a_law_against_itself_is_zero():
    # lazy walk with q = 1/5 is uniform on ball(1), which is the reference law for w = 1
    rep = gibbs_bound_check(lazy_measure(F2, 0.2), 1, WeightFunction("constant"))
    assert rep["support_superset_size"] == 5
    assert rep["divergence"] == pytest.approx(0.0, abs=1e-15)
    assert rep["H_n"] == pytest.approx(rep["bound"], abs=1e-15)


@pytest.mark.parametrize("n", [1, 4, 7])
def test_gibbs_lazy_walk(n):
    rep = gibbs_bound_check(lazy_measure(F2, 0.3), n, WeightFunction("omega_alpha", 3.0))
    assert rep["nonnegative"] and rep["bound_holds"]


def test_gibbs_rejects_nonpositive_n():
    with pytest.raises(PreconditionError):
        gibbs_bound_check(srw_measure(F2), 0, WeightFunction("constant"))


def test_zero_boundary_entropy():
    rep = criteria_report(2, 0.5 * LOG3, 0.5, 0.0, 3.0)
    assert rep.ii_upper == math.inf and rep.ii_holds
    assert rep.iii_lower == pytest.approx(2 * 0.5 * LOG3 / (0.5 * LOG3))
    assert rep.to_dict()["ii"]["holds_iff_p_below"] == "inf"


def test_srw_thresholds_and_interval():
    rep = criteria_report(2, 0.5 * LOG3, 0.5, 0.1, 4.0)
    assert rep.ii_holds and rep.iii_holds
    lo, hi = rep.both_interval
    assert lo == pytest.approx(2.445, abs=1e-3) and hi == pytest.approx(10.986, abs=1e-3)


def test_thresholds_cross_at_four():
    rep = criteria_report(2, 0.5 * LOG3, 0.5, LOG3 / 4, 4.0)
    assert rep.crossing_p == pytest.approx(4.0, abs=1e-12)
    assert rep.crossing_h_X == pytest.approx(LOG3 / 4, abs=1e-12)
    assert rep.ii_upper == pytest.approx(4.0) and rep.iii_lower == pytest.approx(4.0)


def test_iii_never_holds_when_boundary_entropy_exceeds_h():
    rep = criteria_report(2, 0.5 * LOG3, 0.5, 0.6, 4.0)
    assert rep.iii_lower is None and not rep.iii_holds
    assert rep.to_dict()["iii"]["holds_iff_p_above"] == "never"


@pytest.mark.parametrize(
    "args",
    [(1, 0.5, 0.5, 0.1, 4.0), (2, 0.0, 0.5, 0.1, 4.0), (2, 0.5, -1.0, 0.1, 4.0), (2, 0.5, 0.5, -0.1, 4.0), (2, 0.5, 0.5, 0.1, 1.5)],
)
def test_criteria_domains(args):
    with pytest.raises(PreconditionError):
        criteria_report(*args)
