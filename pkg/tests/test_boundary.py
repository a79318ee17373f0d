from __future__ import annotations

import math

import pytest

from pfcross.boundary import (
    furstenberg_entropy,
    furstenberg_entropy_bruteforce,
    harmonic_measure,
    nearest_neighbor_speed,
    stationarity_residual,
    xi_bruteforce,
    xi_function,
    xi_srw_closed_form,
)
from pfcross.errors import PreconditionError
from pfcross.group import FreeGroup
from pfcross.walks import Measure, avez_entropy, lazy_measure, measure_power, speed, srw_measure

F2 = FreeGroup(2)
BIASED = Measure.from_terms(F2, [("a", 0.5), ("A", 1 / 6), ("b", 1 / 6), ("B", 1 / 6)])


def test_srw_cylinders():
    nu = harmonic_measure(srw_measure(F2))
    for w in ("a", "B", "ab", "aBB", "abAB"):
        assert nu.cylinder(w) == pytest.approx(0.25 * 3.0 ** (1 - len(w)), abs=1e-15)


@pytest.mark.parametrize("mu", [BIASED, lazy_measure(F2, 0.3), srw_measure(FreeGroup(3))])
def test_stationarity(mu):
    nu = harmonic_measure(mu)
    assert stationarity_residual(mu, nu) < 1e-12
    assert sum(nu.first) == pytest.approx(1.0, abs=1e-14)


def test_biased_walk_prefers_the_drift():
    nu = harmonic_measure(BIASED)
    first = dict(zip("aAbB", nu.first))
    assert first["b"] == pytest.approx(first["B"], abs=1e-15)
    assert first["a"] > first["b"] > first["A"]


@pytest.mark.parametrize(
    "mu",
    [
        srw_measure(FreeGroup(1)),
        Measure.from_terms(F2, [("ab", 0.5), ("BA", 0.5)]),
        Measure.from_terms(F2, [("a", 0.5), ("b", 0.5)]),
    ],
)
def test_rejected_measures(mu):
    with pytest.raises(PreconditionError):
        harmonic_measure(mu)


def test_srw_furstenberg_entropy():
    mu = srw_measure(F2)
    nu = harmonic_measure(mu)
    h = furstenberg_entropy(mu, nu)
    assert h == pytest.approx(0.5 * math.log(3), abs=1e-12)
    assert furstenberg_entropy(measure_power(mu, 3), nu) == pytest.approx(3 * h, abs=1e-10)


@pytest.mark.parametrize("mu", [BIASED, lazy_measure(F2, 0.3)])
def test_furstenberg_entropy_against_direct_cylinder_sums(mu):
    nu = harmonic_measure(mu)
    assert furstenberg_entropy(mu, nu) == pytest.approx(furstenberg_entropy_bruteforce(mu, nu), abs=1e-12)


def test_invariant_case_has_zero_entropy():
    nu = harmonic_measure(srw_measure(F2))
    assert furstenberg_entropy(Measure(F2, {(): 1.0}), nu) == 0.0


def test_xi_values():
    nu = harmonic_measure(srw_measure(F2))
    assert xi_function("", nu) == 1.0
    assert xi_function("b", nu) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert xi_function("aB", nu) == pytest.approx(2 / 3, abs=1e-12)
    for w in ("abA", "abab", "BBaab"):
        assert xi_function(w, nu) == pytest.approx(xi_srw_closed_form(len(w), 2), abs=1e-12)
        assert xi_function(w, nu) == pytest.approx(xi_bruteforce(w, nu), abs=1e-12)


def test_xi_for_biased_walk_against_oracle():
    nu = harmonic_measure(BIASED)
    for w in ("a", "A", "ab", "Bab"):
        assert xi_function(w, nu) == pytest.approx(xi_bruteforce(w, nu), abs=1e-12)
        assert 0.0 < xi_function(w, nu) <= 1.0


@pytest.mark.parametrize("mu", [BIASED, lazy_measure(F2, 0.3)])
def test_nearest_neighbor_speed_matches_length_sequence(mu):
    rep = speed(mu, 1500)
    assert nearest_neighbor_speed(mu) == pytest.approx(rep.extrapolated, abs=2e-3)


def test_biased_boundary_entropy_agrees_with_avez_entropy():
    # the free-group boundary is the Poisson boundary, so both entropies coincide
    nu = harmonic_measure(BIASED)
    h = furstenberg_entropy(BIASED, nu)
    h_avez = avez_entropy(BIASED, 11).h_extrapolated
    assert abs(h - h_avez) <= 0.03 * h
    # integrating d(s nu)/d nu instead of d(s^-1 nu)/d nu lands about 8% away
    flipped = -math.fsum(m * math.fsum(w * math.log(r) for w, r in nu.ratio_profile(BIASED.group.inv(s)) if w > 0) for s, m in BIASED.masses.items())
    assert abs(flipped - h_avez) > 0.05 * h
