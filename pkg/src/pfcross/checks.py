"""Invariant suites run by ``pf check``; each check returns a named pass/fail record."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import Action, AlgebraElement, ball_unitaries, delta, involute, srw_element
from .boundary import (
    furstenberg_entropy,
    furstenberg_entropy_bruteforce,
    harmonic_measure,
    stationarity_residual,
    xi_bruteforce,
    xi_function,
)
from .errors import PreconditionError
from .criteria import WeightFunction, criteria_report, gibbs_bound_check, psd_gram_check, weight_membership
from .group import CyclicGroup, FreeGroup, GroupSpec, ProductGroup, enumerate_ball
from .pnorm import (
    TruncatedOperator,
    amplification_check,
    build_truncated,
    pf_norm,
    pnorm_anchor,
    pnorm_boyd,
    tensor_power_check,
    transpose_dual_check,
)
from .rademacher import enumerate_signs, moment_ratio, moment_ratio_stderr, power_mean_direction, rademacher_sample
from .walks import avez_entropy, convolve_measure, measure_power, speed, srw_measure

SUITES = ("group", "algebra", "pnorm", "rademacher", "entropy")


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "passed": self.passed, "detail": self.detail}


def random_element(
    group: GroupSpec, radius: int, rng: np.random.Generator, n_terms: int = 4, action: Action | None = None, complex_: bool = False
) -> AlgebraElement:
    """A random element supported in the ball of the given radius."""
    ball = enumerate_ball(group, radius)
    action = action or Action.trivial(group, 1)
    d = action.dim
    pick = rng.choice(ball.size, size=min(n_terms, ball.size), replace=False)
    terms = {}
    for i in pick:
        M = rng.standard_normal((d, d))
        if complex_:
            M = M + 1j * rng.standard_normal((d, d))
        terms[ball.value(int(i))] = M
    return AlgebraElement(group, action, terms)


def _bfs_ball(group: GroupSpec, radius: int) -> set:
    seen = {group.identity()}
    frontier = deque([(group.identity(), 0)])
    while frontier:
        g, r = frontier.popleft()
        if r == radius:
            continue
        for x in group.letters():
            h = group.mul(g, x)
            if h not in seen:
                seen.add(h)
                frontier.append((h, r + 1))
    return seen


def _group_suite(seed: int) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    for G, R in [(FreeGroup(2), 4), (FreeGroup(3), 3), (CyclicGroup(7), 4), (ProductGroup((FreeGroup(1), CyclicGroup(3))), 3)]:
        ball = enumerate_ball(G, R)
        vals = ball.values()
        ok = set(vals) == _bfs_ball(G, R) and all(ball.index(v) == i for i, v in enumerate(vals))
        out.append(CheckResult("group", f"ball-matches-bfs[{G},R={R}]", ok, {"size": ball.size}))
        g = vals[int(rng.integers(ball.size))]
        m = ball.left_mul_map(g)
        expect = np.array([ball.index(G.mul(g, v)) for v in vals])
        out.append(CheckResult("group", f"left-multiplication-map[{G}]", bool(np.array_equal(m, expect))))
        trip = [tuple(vals[int(i)] for i in rng.integers(ball.size, size=3)) for _ in range(50)]
        assoc = all(G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c)) for a, b, c in trip)
        inv = all(G.mul(a, G.inv(a)) == G.identity() for a, _, _ in trip)
        out.append(CheckResult("group", f"associativity-and-inverses[{G}]", assoc and inv))
    G = FreeGroup(2)
    sizes = [G.sphere_size(n) for n in range(6)]
    out.append(CheckResult("group", "free-sphere-sizes", sizes == [1, 4, 12, 36, 108, 324], {"sizes": sizes}))
    return out


def _algebra_suite(seed: int) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    G = FreeGroup(2)
    act = Action.swap(G, 2)
    f, g, h = (random_element(G, 1, rng, 3, act, complex_=True) for _ in range(3))
    out.append(CheckResult("algebra", "associativity", ((f * g) * h).allclose(f * (g * h), 1e-10)))
    out.append(CheckResult("algebra", "involution-anti-multiplicative", involute(f * g).allclose(involute(g) * involute(f), 1e-10)))
    out.append(CheckResult("algebra", "involution-is-involutive", involute(involute(f)).allclose(f, 1e-12)))
    ball = enumerate_ball(G, 3)
    U = ball_unitaries(ball, act)
    ok = all(np.array_equal(U[i], act.unitary(v)) for i, v in enumerate(ball.values()))
    out.append(CheckResult("algebra", "ball-unitaries-match-action", ok))
    R = 4
    Tf, Tg, Tfg = (TruncatedOperator(e, R) for e in (f, g, f * g))
    x = Tf.zeros(inner=False, dtype=complex)
    n_in = ball.inner_size(R - 2)
    x[:n_in] = rng.standard_normal((n_in, 2, 1))
    err = float(np.abs(Tf.matvec(Tg.matvec(x)) - Tfg.matvec(x)).max())
    out.append(CheckResult("algebra", "covariant-representation-is-multiplicative", err < 1e-12, {"error": err}))
    Tfs = TruncatedOperator(involute(f), R)
    y = rng.standard_normal((Tf.N, 2, 1))
    err = float(np.abs(Tf.rmatvec(y) - Tfs.matvec(y)).max())
    out.append(CheckResult("algebra", "adjoint-is-involution", err < 1e-12, {"error": err}))
    return out


def _pnorm_suite(seed: int) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    G = FreeGroup(2)
    for p in (1.2, 1.5, 2.0, 3.0):
        est = pf_norm(delta(G), p, 4, seed=seed)
        out.append(CheckResult("pnorm", f"identity-norm[p={p}]", abs(est.lower - 1) < 1e-12 and abs(est.upper - 1) < 1e-12))
    worst_dual, rt_ok = 0.0, True
    for _ in range(10):
        f = random_element(G, 2, rng, 5)
        T, Ts = TruncatedOperator(f, 4), TruncatedOperator(involute(f), 4)
        worst_dual = max(worst_dual, abs(pnorm_anchor(T, 1) - pnorm_anchor(Ts, math.inf)))
        n1, n2, ninf = pnorm_anchor(T, 1), pnorm_anchor(T, 2), pnorm_anchor(T, math.inf)
        rt_ok &= n2 <= math.sqrt(n1 * ninf) * (1 + 1e-12)
    out.append(CheckResult("pnorm", "anchor-duality", worst_dual < 1e-12, {"max_difference": worst_dual}))
    out.append(CheckResult("pnorm", "matrix-riesz-thorin", bool(rt_ok)))
    est = pnorm_boyd(build_truncated(srw_element(G), 6), 1.5, seed=seed)
    out.append(
        CheckResult("pnorm", "srw-sandwich[p=1.5,R=6]", est.lower <= est.upper <= 1.0 + 1e-12, {"lower": est.lower, "upper": est.upper})
    )
    f = random_element(G, 2, rng, 3)
    xi = {"": rng.standard_normal(2), "b": rng.standard_normal(2)}
    rep = tensor_power_check(f, xi, 1.5)
    out.append(CheckResult("pnorm", "tensor-power-identity", rep["passed"], {"difference": rep["difference"]}))
    rep = amplification_check(f, 3, 2.0, 4, seed=seed)
    out.append(CheckResult("pnorm", "amplification-isometric-at-2", rep["passed"], {"ratio": rep["ratio"]}))
    rep = transpose_dual_check(TruncatedOperator(f, 4), TruncatedOperator(involute(f), 4), 2.0)
    out.append(CheckResult("pnorm", "transpose-duality-report", rep["passed"]))
    return out


def _rademacher_suite(seed: int) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 4))
    exact = enumerate_signs(x)
    smp = rademacher_sample(x, 20_000, seed)
    r_exact, r_mc = moment_ratio(exact, 1.0, 2.0), moment_ratio(smp, 1.0, 2.0)
    se = moment_ratio_stderr(smp, 1.0, 2.0)
    out.append(CheckResult("rademacher", "oracle-agreement", abs(r_mc - r_exact) <= 3 * se, {"exact": r_exact, "mc": r_mc, "stderr": se}))
    ok = all(power_mean_direction(smp, a, b) for a, b in [(1, 2), (2, 1), (1.5, 3), (3, 1.5)])
    out.append(CheckResult("rademacher", "power-mean-direction", ok))
    again = rademacher_sample(x, 20_000, seed)
    out.append(CheckResult("rademacher", "seed-determinism", bool(np.array_equal(again.norms, smp.norms))))
    pair = enumerate_signs(np.eye(2))
    out.append(CheckResult("rademacher", "orthogonal-pair-ratio", moment_ratio(pair, 1.0, 2.0) == 1.0))
    return out


def _entropy_suite(seed: int) -> list[CheckResult]:
    out = []
    G = FreeGroup(2)
    mu = srw_measure(G)
    rep = avez_entropy(mu, 8)
    d = rep.diagnostics
    out.append(CheckResult("entropy", "H1-is-log4", abs(rep.h_sequence[0][1] - math.log(4)) < 1e-12))
    out.append(CheckResult("entropy", "entropy-ratios-nonincreasing", d["ratios_nonincreasing"]))
    out.append(CheckResult("entropy", "entropy-subadditive", d["subadditive"]))
    m2 = convolve_measure(mu, mu)
    out.append(CheckResult("entropy", "two-step-return-mass", abs(m2.mass("") - 0.25) < 1e-15))
    s2, s3 = speed(mu, 2000).last, speed(srw_measure(FreeGroup(3)), 2000).last
    out.append(CheckResult("entropy", "speed-srw", abs(s2 - 0.5) < 1e-3 and abs(s3 - 2 / 3) < 1e-3, {"F2": s2, "F3": s3}))
    nu = harmonic_measure(mu)
    res = stationarity_residual(mu, nu)
    out.append(CheckResult("entropy", "stationarity", res < 1e-12, {"residual": res}))
    hf = furstenberg_entropy(mu, nu)
    out.append(CheckResult("entropy", "furstenberg-srw", abs(hf - 0.5 * math.log(3)) < 1e-9, {"value": hf}))
    out.append(CheckResult("entropy", "furstenberg-oracle", abs(hf - furstenberg_entropy_bruteforce(mu, nu)) < 1e-12))
    h2 = furstenberg_entropy(measure_power(mu, 2), nu)
    out.append(CheckResult("entropy", "furstenberg-scaling", abs(h2 - 2 * hf) < 1e-10))
    out.append(CheckResult("entropy", "furstenberg-below-avez", hf <= rep.fekete_upper + 1e-9))
    xs = [xi_function(w, nu) for w in ("a", "ab")]
    ok = xi_function("", nu) == 1.0 and abs(xs[0] - math.sqrt(3) / 2) < 1e-10 and abs(xs[1] - 2 / 3) < 1e-10
    out.append(CheckResult("entropy", "xi-values", ok, {"xi": xs}))
    out.append(CheckResult("entropy", "xi-oracle", abs(xi_bruteforce("aB", nu) - xs[1]) < 1e-12))
    out.append(CheckResult("entropy", "xi-gram-psd", psd_gram_check(WeightFunction("xi_power", 1.0, nu), G, 2)["passed"]))
    out.append(CheckResult("entropy", "phi-gram-psd", psd_gram_check(WeightFunction("phi_beta", 0.5), G, 3)["passed"]))
    wm = weight_membership(WeightFunction("phi_beta", 0.5), 2, 2)
    out.append(CheckResult("entropy", "phi-sum", abs(wm["sum"] - 5.0) < 1e-9 and abs(wm["partial_sums"][-1]["partial_sum"] - 5.0) < 1e-9))
    ok = all(gibbs_bound_check(mu, 6, w)["nonnegative"] for w in (WeightFunction("constant"), WeightFunction("omega_alpha", 2.0), WeightFunction("xi_power", -2.0)))
    out.append(CheckResult("entropy", "gibbs-nonnegative", ok))
    cr = criteria_report(2, 0.5 * math.log(3), 0.5, 0.1, 4.0)
    ok = abs(cr.ii_upper - 10.986) < 1e-3 and abs(cr.iii_lower - 2.445) < 1e-3 and max(cr.endpoint_residuals.values()) < 1e-12
    out.append(CheckResult("entropy", "criteria-thresholds", ok, cr.to_dict()["endpoint_residuals"]))
    return out


RUNNERS: dict[str, Callable[[int], list[CheckResult]]] = {
    "group": _group_suite,
    "algebra": _algebra_suite,
    "pnorm": _pnorm_suite,
    "rademacher": _rademacher_suite,
    "entropy": _entropy_suite,
}


def run_suite(name: str, seed: int = 0) -> tuple[list[CheckResult], dict[str, float]]:
    """Run one suite or ``all``; returns results and per-suite wall times."""
    names = SUITES if name == "all" else (name,)
    results, times = [], {}
    for n in names:
        if n not in RUNNERS:
            raise PreconditionError(f"unknown suite {n!r}; expected one of {SUITES + ('all',)}")
        t0 = time.perf_counter()
        results.extend(RUNNERS[n](seed))
        times[n] = time.perf_counter() - t0
    return results, times
