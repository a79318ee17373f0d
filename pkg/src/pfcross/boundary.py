"""Harmonic measure on the boundary of a free group for nearest-neighbour walks.

Boundary points are infinite reduced words; ``C_w`` is the cylinder of
points starting with ``w``.  With ``F(x)`` the probability that the walk
ever visits the letter ``x``, the harmonic measure is

    nu(C_{x_1..x_n}) = F(x_1) ... F(x_n) * (1 - nu(C_{x_n^-1}))

so every Radon-Nikodym derivative ``d(t nu)/d nu`` is constant on cylinders
of depth ``|t| + 1`` and all integrals below are finite sums.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .group import FreeGroup, code_of
from .walks import Measure

FIXED_POINT_TOL = 1e-15
FIXED_POINT_MAX_ITER = 1_000_000


@dataclass(frozen=True)
class BoundaryMeasure:
    group: FreeGroup
    hit: tuple[float, ...]  # F(x) by letter code
    first: tuple[float, ...]  # nu(C_x) by letter code
    iterations: int = 0

    def _prod_hit(self, word) -> float:
        out = 1.0
        for x in word:
            out *= self.hit[code_of(x)]
        return out

    def cylinder(self, word) -> float:
        """``nu(C_w)``; the empty word is the whole boundary."""
        w = self.group.value(word) if isinstance(word, str) else tuple(word)
        if not w:
            return 1.0
        last_inv = code_of(w[-1]) ^ 1
        return self._prod_hit(w) * (1.0 - self.first[last_inv])

    def translate_cylinder(self, g, word) -> float:
        """``nu(g C_w)`` for a group element ``g``."""
        G = self.group
        g = G.value(g) if isinstance(g, str) else tuple(g)
        w = G.value(word) if isinstance(word, str) else tuple(word)
        if not w:
            return 1.0
        gw = G.mul(g, w)
        cancelled = len(g) + len(w) - len(gw)
        if cancelled < 2 * len(w):
            return self.cylinder(gw)
        # g ends with w^-1: g C_w is the complement of C_{(gw) w_n^-1}
        return 1.0 - self.cylinder(G.mul(gw, (-w[-1],)))

    def ratio_profile(self, t) -> list[tuple[float, float]]:
        """Pieces ``(mass, ratio)`` of ``x -> nu(t C)/nu(C)`` for small cylinders ``C`` at ``x``.

        Piece ``j`` collects the points whose longest common prefix with
        ``t^-1`` has length exactly ``j``.
        """
        G = self.group
        t = G.value(t) if isinstance(t, str) else tuple(t)
        n = len(t)
        tinv = G.inv(t)
        cyl = [self.cylinder(tinv[:j]) for j in range(n + 1)] + [0.0]
        out = []
        for j in range(n + 1):
            mass = cyl[j] - cyl[j + 1]
            ratio = self._prod_hit(t[: n - j]) / self._prod_hit(tinv[:j])
            out.append((mass, ratio))
        return out

    def to_dict(self) -> dict:
        G = self.group
        letters = [G.format(x) for x in G.letters()]
        return {
            "group": str(G),
            "hitting_probabilities": dict(zip(letters, self.hit)),
            "first_letter_masses": dict(zip(letters, self.first)),
            "iterations": self.iterations,
        }


def harmonic_measure(mu: Measure, tol: float = FIXED_POINT_TOL, max_iter: int = FIXED_POINT_MAX_ITER) -> BoundaryMeasure:
    """Solve the first-passage identities by monotone fixed-point iteration.

    ``F(x) = mu(x) + mu(e) F(x) + sum_{y != x} mu(y) F(y^-1) F(x)`` is
    rearranged to ``F(x) = mu(x) / (1 - mu(e) - sum_{y != x} mu(y) F(y^-1))``
    and iterated from zero, which converges upward to the minimal solution.
    """
    G = mu.group
    if not isinstance(G, FreeGroup) or G.k < 2:
        raise PreconditionError("harmonic measure needs a free group of rank >= 2")
    if not mu.is_nearest_neighbor:
        raise PreconditionError("harmonic measure is implemented for nearest-neighbour measures only")
    if mu.is_degenerate:
        raise PreconditionError("measure support does not generate the group as a semigroup")
    K = 2 * G.k
    m = np.array([mu.masses.get(x, 0.0) for x in G.letters()])
    me = mu.identity_mass
    inv = np.arange(K) ^ 1
    F = np.zeros(K)
    it = 0
    for it in range(1, max_iter + 1):
        back = m * F[inv]  # mu(y) F(y^-1)
        new = m / (1.0 - me - (back.sum() - back))
        delta = float(np.max(np.abs(new - F)))
        F = new
        if delta < tol:
            break
    nu1 = F * (1.0 - F[inv]) / (1.0 - F * F[inv])
    return BoundaryMeasure(G, tuple(float(x) for x in F), tuple(float(x) for x in nu1), it)


def stationarity_residual(mu: Measure, nu: BoundaryMeasure) -> float:
    """``max_x |sum_s mu(s) nu(s^-1 C_x) - nu(C_x)|`` over depth-1 cylinders."""
    G = nu.group
    worst = 0.0
    for x in G.letters():
        lhs = math.fsum(m * nu.translate_cylinder(G.inv(s), x) for s, m in mu.masses.items())
        worst = max(worst, abs(lhs - nu.cylinder(x)))
    return worst


def furstenberg_entropy(mu: Measure, nu: BoundaryMeasure) -> float:
    """``-sum_s mu(s) int log d(s^-1 nu)/d nu  d nu``, a finite cylinder sum."""
    if mu.group != nu.group:
        raise PreconditionError("measure and boundary measure live on different groups")
    total = []
    for s, m in mu.masses.items():
        total.append(-m * math.fsum(w * math.log(r) for w, r in nu.ratio_profile(s) if w > 0))
    return max(math.fsum(total), 0.0)


def xi_function(s, nu: BoundaryMeasure) -> float:
    """Harish-Chandra function ``Xi(s) = int [d(s nu)/d nu]^(1/2) d nu``."""
    G = nu.group
    s = G.value(s) if isinstance(s, str) else tuple(s)
    if not s:
        return 1.0
    return math.fsum(w * math.sqrt(r) for w, r in nu.ratio_profile(G.inv(s)))


def cylinder_words(group: FreeGroup, depth: int):
    """All reduced words of exactly ``depth`` letters."""
    letters = [x[0] for x in group.letters()]
    for w in itertools.product(letters, repeat=depth):
        if all(w[i] != -w[i + 1] for i in range(depth - 1)):
            yield w


def translated_integral(t, nu: BoundaryMeasure, fn, depth: int | None = None) -> float:
    """``sum_C nu(C) fn(nu(t C)/nu(C))`` over all cylinders of the given depth.

    This evaluates each ratio directly from translated cylinders, independent
    of :meth:`BoundaryMeasure.ratio_profile`; the depth defaults to ``|t| + 1``.
    """
    G = nu.group
    t = G.value(t) if isinstance(t, str) else tuple(t)
    depth = len(t) + 1 if depth is None else depth
    terms = []
    for w in cylinder_words(G, depth):
        c = nu.cylinder(w)
        terms.append(c * fn(nu.translate_cylinder(t, w) / c))
    return math.fsum(terms)


def furstenberg_entropy_bruteforce(mu: Measure, nu: BoundaryMeasure) -> float:
    return math.fsum(-m * translated_integral(s, nu, math.log) for s, m in mu.masses.items())


def xi_bruteforce(s, nu: BoundaryMeasure) -> float:
    G = nu.group
    s = G.value(s) if isinstance(s, str) else tuple(s)
    return translated_integral(G.inv(s), nu, math.sqrt)


def xi_srw_closed_form(n: int, k: int) -> float:
    """``Xi`` at word length ``n`` for the simple random walk on ``F_k``."""
    q = 2 * k - 1
    return (1.0 + n * (q - 1) / (q + 1)) * q ** (-n / 2.0)


def nearest_neighbor_speed(mu: Measure) -> float:
    """Speed of a nearest-neighbour walk: ``sum_s mu(s) (1 - 2 nu_check(C_s))``.

    A step ``s`` shortens the word exactly when the current last letter is
    ``s^-1``; the last letter of ``X_n`` is asymptotically distributed as the
    first letter of the boundary limit for the reflected measure.
    """
    nu_check = harmonic_measure(mu.reflect())
    G = mu.group
    return math.fsum(
        mu.masses.get(x, 0.0) * (1.0 - 2.0 * nu_check.first[code_of(x[0])]) for x in G.letters()
    )
