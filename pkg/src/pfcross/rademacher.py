"""Moments of Rademacher sums of vectors.

A family ``x_1..x_n`` is stored as an array of shape ``(n, *shape)``.  With
``shape == (N,)`` the space is ``C^N`` with the l^p norm ``space_p`` (2 by
default, the Hilbert case); with ``shape == (N, d, m)`` it is the ball
geometry ``l^p(ball; C^d (x) C^m)`` of the norm engine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .pnorm import lp_of_norms

CHUNK = 8192
MAX_ENUMERATION = 20


def _space_norms(S: np.ndarray, space_p: float) -> np.ndarray:
    """Norms of a batch ``S`` of shape ``(trials, *shape)``."""
    t = S.shape[0]
    if S.ndim == 2:
        blocks = np.abs(S)
    else:
        flat = S.reshape(t, S.shape[1], -1)
        blocks = np.sqrt(np.sum(np.abs(flat) ** 2, axis=2))
    if space_p == 2.0 and S.ndim == 2:
        return np.sqrt(np.sum(blocks**2, axis=1))
    return np.array([lp_of_norms(b, space_p) for b in blocks])


@dataclass
class RademacherSample:
    vectors: np.ndarray
    signs: np.ndarray
    norms: np.ndarray
    space_p: float = 2.0
    seed: int | None = None
    exhaustive: bool = False

    @property
    def trials(self) -> int:
        return int(self.norms.shape[0])


def _check_family(vectors) -> np.ndarray:
    x = np.asarray(vectors)
    if x.ndim < 2 or x.shape[0] < 1:
        raise PreconditionError("need a nonempty family of vectors, shape (n, dim, ...)")
    return x


def rademacher_sample(vectors, trials: int, seed: int = 0, space_p: float = 2.0) -> RademacherSample:
    """Draw ``trials`` iid sign patterns and record ``||sum eps_k x_k||`` for each.

    Signs are generated in fixed-size chunks with seeds spawned from ``seed``,
    so the sample does not depend on how the work is scheduled.
    """
    x = _check_family(vectors)
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    n = x.shape[0]
    n_chunks = -(-trials // CHUNK)
    signs = np.empty((trials, n), dtype=np.int8)
    norms = np.empty(trials)
    for c, ss in enumerate(np.random.SeedSequence(seed).spawn(n_chunks)):
        lo, hi = c * CHUNK, min((c + 1) * CHUNK, trials)
        eps = np.random.default_rng(ss).integers(0, 2, size=(hi - lo, n), dtype=np.int8) * 2 - 1
        signs[lo:hi] = eps
        norms[lo:hi] = _space_norms(np.tensordot(eps.astype(float), x, axes=1), space_p)
    return RademacherSample(x, signs, norms, space_p, seed)


def enumerate_signs(vectors, space_p: float = 2.0) -> RademacherSample:
    """All ``2^n`` sign patterns, each with equal weight."""
    x = _check_family(vectors)
    n = x.shape[0]
    if n > MAX_ENUMERATION:
        raise PreconditionError(f"exhaustive enumeration limited to n <= {MAX_ENUMERATION}, got {n}")
    eps = np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int8)
    norms = _space_norms(np.tensordot(eps.astype(float), x, axes=1), space_p)
    return RademacherSample(x, eps, norms, space_p, None, exhaustive=True)


def moment(norms: np.ndarray, r: float) -> float:
    """``(mean norm^r)^(1/r)`` with compensated summation."""
    if len(norms) == 0:
        raise PreconditionError("empty sample")
    return (math.fsum(np.asarray(norms, dtype=float) ** r) / len(norms)) ** (1.0 / r)


def moment_ratio(sample: RademacherSample, p: float, q: float) -> float:
    """``(E||S||^q)^(1/q) / (E||S||^p)^(1/p)`` over the sample."""
    if p < 1 or q < 1:
        raise PreconditionError(f"moment exponents must be >= 1, got {p}, {q}")
    if sample.trials < 1:
        raise PreconditionError("empty sample")
    if p == q:
        return 1.0
    lo = moment(sample.norms, p)
    if lo == 0.0:
        return 1.0
    return moment(sample.norms, q) / lo


def moment_ratio_stderr(sample: RademacherSample, p: float, q: float) -> float:
    """Delta-method standard error of ``moment_ratio`` for a Monte Carlo sample."""
    if sample.exhaustive or p == q:
        return 0.0
    X = sample.norms
    t = len(X)
    if t < 2:
        return math.inf
    a, b = X**q, X**p
    A, B = a.mean(), b.mean()
    if A == 0 or B == 0:
        return 0.0
    cov = np.cov(np.vstack([a, b]), ddof=1)
    var_log = cov[0, 0] / (q * A) ** 2 + cov[1, 1] / (p * B) ** 2 - 2 * cov[0, 1] / (p * q * A * B)
    return moment_ratio(sample, p, q) * math.sqrt(max(var_log, 0.0) / t)


def power_mean_direction(sample: RademacherSample, p: float, q: float, slack: float = 1e-13) -> bool:
    """Check ``ratio >= 1`` when ``q >= p`` and ``ratio <= 1`` when ``q <= p``, up to rounding."""
    r = moment_ratio(sample, p, q)
    if q >= p:
        return r >= 1.0 - slack
    return r <= 1.0 + slack


def standard_families(dim: int, n: int, seed: int = 0) -> dict[str, np.ndarray]:
    """Named vector families in ``C^dim`` used by the constant scan."""
    if dim < 1 or n < 1:
        raise PreconditionError("dim and n must be >= 1")
    basis = np.zeros((n, dim))
    basis[np.arange(n), np.arange(n) % dim] = 1.0
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    equal = np.zeros((n, dim))
    equal[:, 0] = 1.0
    return {"basis": basis, "gaussian": rng.standard_normal((n, dim)), "equal": equal}


def kahane_constant_scan(
    families: dict[str, np.ndarray] | Sequence[np.ndarray],
    p: float,
    trials: int = 100_000,
    seed: int = 0,
    space_p: float = 2.0,
    exact_up_to: int = 12,
) -> dict:
    """Empirical lower estimates of ``K_{p,2}``, ``K_{2,p}`` and their product.

    ``K_{a,b}`` is the least constant with ``M_a <= K_{a,b} M_b`` where
    ``M_r = (E||S||^r)^(1/r)``.  Each estimate is the maximum observed
    ``M_a / M_b`` over the families, floored at 1; families with at most
    ``exact_up_to`` vectors are evaluated over all sign patterns.
    """
    if p < 1:
        raise PreconditionError(f"p must be >= 1, got {p}")
    if not isinstance(families, dict):
        families = {f"family-{i}": x for i, x in enumerate(families)}
    rows = []
    seeds = np.random.SeedSequence(seed).generate_state(len(families))
    for (name, x), s in zip(families.items(), seeds):
        x = _check_family(x)
        if x.shape[0] <= exact_up_to:
            smp = enumerate_signs(x, space_p)
        else:
            smp = rademacher_sample(x, trials, int(s), space_p)
        rows.append(
            {
                "family": name,
                "n": int(x.shape[0]),
                "exhaustive": smp.exhaustive,
                "trials": smp.trials,
                "ratio_p_over_2": moment_ratio(smp, 2.0, p),
                "ratio_2_over_p": moment_ratio(smp, p, 2.0),
                "stderr_2_over_p": moment_ratio_stderr(smp, p, 2.0),
                "direction_holds": power_mean_direction(smp, p, 2.0) and power_mean_direction(smp, 2.0, p),
            }
        )
    k_p2 = max([1.0] + [r["ratio_p_over_2"] for r in rows])
    k_2p = max([1.0] + [r["ratio_2_over_p"] for r in rows])
    return {
        "p": float(p),
        "space_p": float(space_p),
        "seed": seed,
        "families": rows,
        "K_p2": k_p2,
        "K_2p": k_2p,
        "C_p_lower_estimate": k_p2 * k_2p,
        "direction_holds": all(r["direction_holds"] for r in rows),
    }
