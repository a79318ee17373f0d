from __future__ import annotations

import math

import numpy as np
import pytest

from pfcross.errors import PreconditionError, ResourceError
from pfcross.group import CyclicGroup, FreeGroup
from pfcross.walks import (
    Measure,
    aitken,
    avez_entropy,
    convolve_measure,
    exact_horizon,
    fit_entropy_rate,
    lazy_measure,
    measure_power,
    parse_measure,
    radial_speed_closed_form,
    shannon,
    speed,
    srw_measure,
)

F2 = FreeGroup(2)


def test_identity_is_neutral_for_convolution():
    mu = parse_measure({"terms": [{"word": "a", "mass": 0.5}, {"word": "B", "mass": 0.3}, {"word": "ab", "mass": 0.2}]}, F2)
    assert convolve_measure(Measure(F2, {(): 1.0}), mu) == mu


def test_two_step_srw_distribution_by_path_count():
    # 16 equally likely paths: 4 return, 12 reach distinct length-2 words
    m2 = measure_power(srw_measure(F2), 2)
    assert len(m2.support) == 13
    assert m2.mass("") == pytest.approx(0.25, abs=1e-15)
    assert all(m2.mass(w) == pytest.approx(1 / 16, abs=1e-15) for w in m2.support if w)


def test_masses_must_form_a_probability():
    with pytest.raises(PreconditionError):
        Measure(F2, {(1,): 0.5})
    with pytest.raises(PreconditionError):
        Measure(F2, {(1,): 1.5, (-1,): -0.5})


def test_degeneracy():
    assert Measure(F2, {(1,): 1.0}).is_degenerate
    assert Measure(F2, {(1,): 0.5, (-1,): 0.5}).is_degenerate
    assert not srw_measure(F2).is_degenerate
    with pytest.raises(PreconditionError):
        avez_entropy(Measure(F2, {(1,): 1.0}), 4)


def test_lazy_measure_masses():
    mu = lazy_measure(F2, 0.2)
    assert mu.identity_mass == pytest.approx(0.2)
    assert mu.mass("a") == pytest.approx(0.2)
    with pytest.raises(PreconditionError):
        lazy_measure(F2, 1.0)


def test_shannon_of_uniform():
    assert shannon(np.full(8, 1 / 8)) == pytest.approx(math.log(8))
    assert shannon(np.array([1.0, 0.0])) == 0.0


def test_entropy_rate_fit_recovers_exact_model():
    ns = np.arange(5, 13)
    Hs = 0.4 * ns + 0.7 * np.log(ns) - 1.1 + 0.3 / ns
    assert fit_entropy_rate(ns, Hs) == pytest.approx(0.4, abs=1e-9)


def test_aitken_on_geometric_sequence():
    seq = [1.0 + 0.5**n for n in range(6)]
    assert aitken(seq) == pytest.approx(1.0, abs=1e-12)


def test_srw_entropy_sequence():
    rep = avez_entropy(srw_measure(F2), 8)
    Hs = [H for _, H, _ in rep.h_sequence]
    assert Hs[0] == pytest.approx(math.log(4), abs=1e-14)
    # H_2 from 1/4 at the identity and 1/16 at twelve words
    assert Hs[1] == pytest.approx(-(0.25 * math.log(0.25) + 12 / 16 * math.log(1 / 16)), abs=1e-14)
    assert rep.diagnostics["subadditive"] and rep.diagnostics["ratios_nonincreasing"]
    assert rep.fekete_upper >= rep.h_extrapolated


def test_entropy_horizon_shrinks_under_memory_cap():
    # ball(4) has 161 elements and ball(5) has 485
    assert exact_horizon(srw_measure(F2), 12, cap=200) == 4
    assert len(avez_entropy(srw_measure(F2), 12, cap=200).h_sequence) == 4
    with pytest.raises(ResourceError):
        avez_entropy(srw_measure(F2), 12, cap=3)


def test_monte_carlo_entropy_is_seeded():
    mu = lazy_measure(F2, 0.2)
    a = avez_entropy(mu, 5, mc_samples=500, seed=3).to_dict()
    b = avez_entropy(mu, 5, mc_samples=500, seed=3).to_dict()
    assert a == b


@pytest.mark.parametrize("k, target", [(2, 0.5), (3, 2 / 3), (4, 0.75)])
def test_srw_speed(k, target):
    mu = srw_measure(FreeGroup(k))
    rep = speed(mu, 2000)
    assert abs(rep.last - target) <= 1e-3
    assert radial_speed_closed_form(mu) == pytest.approx(target, abs=1e-15)


def test_lazy_speed_closed_form():
    mu = lazy_measure(F2, 0.2)
    assert speed(mu, 2000).last == pytest.approx(0.8 * 0.5, abs=1e-3)


def test_speed_on_integers_decays():
    rep = speed(srw_measure(FreeGroup(1)), 2000)
    seq = rep.sequence
    assert seq[-1] < 0.02
    # mean |X_n| is about sqrt(2n/pi)
    assert seq[-1] * math.sqrt(2000) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-3)


def test_speed_on_finite_group_tends_to_zero():
    mu = srw_measure(CyclicGroup(5))
    assert speed(mu, 400).last < 0.01
