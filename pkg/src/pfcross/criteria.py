"""Length-weights on free groups, positive-definiteness and Gibbs checks, and the p-thresholds."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.special import kl_div

from .boundary import BoundaryMeasure, xi_function, xi_srw_closed_form
from .errors import PreconditionError, ResourceError
from .group import FreeGroup, GroupSpec, enumerate_ball
from .walks import Measure, PowerSequence, shannon

GRAM_LIMIT = 4000
KINDS = ("phi_beta", "omega_alpha", "xi_power", "constant")


LOG_FLOAT_MAX = math.log(sys.float_info.max)


def _inf(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


@dataclass(frozen=True)
class WeightFunction:
    """A positive function of group elements.

    ``phi_beta``: ``beta^L``; ``omega_alpha``: ``(1+L)^alpha``;
    ``xi_power``: ``Xi^r``, from ``boundary`` when given and otherwise from
    the simple-random-walk closed form; ``constant``: 1.
    """

    kind: str
    param: float = 1.0
    boundary: BoundaryMeasure | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown weight kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "phi_beta" and not 0.0 < self.param < 1.0:
            raise PreconditionError(f"beta must lie in (0, 1), got {self.param}")
        if self.kind == "omega_alpha" and self.param < 0:
            raise PreconditionError(f"alpha must be >= 0, got {self.param}")

    @property
    def is_radial(self) -> bool:
        return self.kind != "xi_power" or self.boundary is None

    def radial(self, n: int, k: int) -> float:
        if self.kind == "phi_beta":
            return self.param**n
        if self.kind == "omega_alpha":
            return (1.0 + n) ** self.param
        if self.kind == "xi_power":
            return xi_srw_closed_form(n, k) ** self.param
        return 1.0

    def __call__(self, group: GroupSpec, value) -> float:
        if not self.is_radial:
            return xi_function(value, self.boundary) ** self.param
        k = group.k if isinstance(group, FreeGroup) else 1
        return self.radial(group.length(value), k)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param, "boundary": self.boundary is not None}


def weight_membership(w: WeightFunction, p: float, k: int, n_terms: int = 400) -> dict:
    """Decide whether ``sum_s w(s)^p`` is finite on ``F_k`` and report partial sums by sphere."""
    if k < 2:
        raise PreconditionError("weight membership is evaluated on free groups of rank >= 2")
    if p <= 0:
        raise PreconditionError("p must be positive")
    if not w.is_radial:
        raise PreconditionError("membership needs a radial weight")
    q = 2 * k - 1
    partial, acc = [], []
    for n in range(n_terms + 1):
        wn = w.radial(n, k)
        if wn == 0.0:
            acc.append(0.0)
            continue
        # sphere sizes outgrow floats long before n_terms; work in logs
        log_term = (0.0 if n == 0 else math.log(2 * k) + (n - 1) * math.log(q)) + p * math.log(wn)
        acc.append(math.inf if log_term > LOG_FLOAT_MAX else math.exp(log_term))
        if n in (1, 2, 5, 10, 20, 50, 100, 200) or n == n_terms:
            partial.append({"n": n, "partial_sum": math.fsum(acc)})
    report = {"weight": w.to_dict(), "p": p, "k": k, "partial_sums": partial}
    if w.kind == "phi_beta":
        beta = w.param
        threshold = q ** (-1.0 / p)
        ratio = q * beta**p
        convergent = beta < threshold
        total = 1.0 + 2 * k * beta**p / (1.0 - ratio) if convergent else math.inf
        report.update(ratio=ratio, threshold_beta=threshold, convergent=convergent, sum=_inf(total))
    elif w.kind == "omega_alpha":
        report.update(ratio=float(q), convergent=False, sum="inf")
    elif w.kind == "xi_power":
        # sphere terms behave like n^(rp) q^(n(1 - rp/2))
        rp = w.param * p
        report.update(ratio=q ** (1.0 - rp / 2.0), threshold_exponent=2.0, convergent=bool(rp > 2.0))
        report["sum"] = math.fsum(acc) if rp > 2.0 else "inf"
    else:
        report.update(ratio=float(q), convergent=False, sum="inf")
    return report


def gram_matrix(w: WeightFunction, group: GroupSpec, radius: int, cap: int | None = None) -> np.ndarray:
    """``[w(s^-1 t)]`` over the ball of the given radius."""
    ball = enumerate_ball(group, radius, cap)
    if ball.size > GRAM_LIMIT:
        raise ResourceError(f"dense Gram matrix of size {ball.size} exceeds {GRAM_LIMIT}", ball.size, GRAM_LIMIT)
    vals = ball.values()
    cache: dict = {}
    N = len(vals)
    M = np.empty((N, N))
    for i, s in enumerate(vals):
        si = group.inv(s)
        for j, t in enumerate(vals):
            u = group.mul(si, t)
            key = group.length(u) if w.is_radial else u
            if key not in cache:
                cache[key] = w(group, u)
            M[i, j] = cache[key]
    return M


def psd_gram_check(w: WeightFunction, group: GroupSpec, radius: int, tol: float = 1e-8, cap: int | None = None) -> dict:
    M = gram_matrix(w, group, radius, cap)
    lam = float(np.linalg.eigvalsh(M).min())
    return {
        "weight": w.to_dict(),
        "radius": radius,
        "size": int(M.shape[0]),
        "min_eigenvalue": lam,
        "symmetric": bool(np.allclose(M, M.T, rtol=0, atol=1e-14)),
        "passed": bool(lam >= -tol),
    }


def gibbs_bound_check(mu: Measure, n: int, omega: WeightFunction, cap: int | None = None) -> dict:
    """Relative entropy of ``mu^{*n}`` against ``eta = omega^-1 / Z`` on the covering ball.

    The divergence is summed as ``sum m log(m/eta) - m + eta`` whose terms are
    individually nonnegative, so ``D >= 0`` holds in floating point as well.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    seq = PowerSequence(mu, n, cap)
    for _ in range(n):
        seq.step()
    m = seq.dist
    ball = seq.ball
    G = mu.group
    if omega.is_radial:
        k = G.k if isinstance(G, FreeGroup) else 1
        per_len = np.array([omega.radial(L, k) for L in range(ball.radius + 1)])
        w = per_len[ball.lengths]
    else:
        w = np.array([omega(G, v) for v in ball.values()])
    inv_w = 1.0 / w
    Z = math.fsum(inv_w)
    eta = inv_w / Z
    D = math.fsum(kl_div(m, eta))
    pos = m > 0
    D_plain = math.fsum(m[pos] * (np.log(m[pos]) - np.log(eta[pos])))
    H = shannon(m)
    bound = math.fsum(m[pos] * np.log(w[pos])) + math.log(Z)
    return {
        "n": n,
        "weight": omega.to_dict(),
        "support_superset_size": int(ball.size),
        "divergence": D,
        "divergence_plain": D_plain,
        "nonnegative": bool(D >= 0.0),
        "H_n": H,
        "bound": bound,
        "H_over_n": H / n,
        "bound_over_n": bound / n,
        "bound_holds": bool(H <= bound + 1e-9),
        "relative_gap": (bound - H) / H if H > 0 else None,
    }


@dataclass
class CriteriaReport:
    k: int
    h: float
    ell: float
    h_X: float
    p: float
    ii_holds: bool
    iii_holds: bool
    ii_upper: float  # (ii) holds iff p < ii_upper
    iii_lower: float | None  # (iii) holds iff p > iii_lower; None means never
    p0: float
    p0_attained: bool
    crossing_p: float
    crossing_h_X: float
    endpoint_residuals: dict

    @property
    def both_interval(self) -> tuple[float, float] | None:
        if self.iii_lower is None:
            return None
        lo = max(self.iii_lower, 2.0)
        return (lo, self.ii_upper) if lo < self.ii_upper else None

    def to_dict(self) -> dict:
        both = self.both_interval
        return {
            "k": self.k,
            "h": self.h,
            "ell": self.ell,
            "h_X": self.h_X,
            "p": self.p,
            "ii": {"holds": self.ii_holds, "holds_iff_p_below": _inf(self.ii_upper)},
            "iii": {
                "holds": self.iii_holds,
                "holds_iff_p_above": "never" if self.iii_lower is None else self.iii_lower,
            },
            "both_hold_on": None if both is None else [both[0], _inf(both[1])],
            "p0": self.p0,
            "p0_attained": self.p0_attained,
            "crossing": {"p": self.crossing_p, "h_X": self.crossing_h_X},
            "endpoint_residuals": self.endpoint_residuals,
        }


def criteria_report(k: int, h: float, ell: float, h_X: float, p: float) -> CriteriaReport:
    """Evaluate ``h_X < (2/p) h`` and ``h_X < h - (2 log(2k-1)/p) ell`` and solve them for p."""
    if k < 2:
        raise PreconditionError("k must be >= 2")
    if not h > 0 or not ell > 0:
        raise PreconditionError("h and ell must be positive")
    if h_X < 0:
        raise PreconditionError("h_X must be >= 0")
    if p < 2:
        raise PreconditionError("p must be >= 2")
    c = 2.0 * math.log(2 * k - 1) * ell
    ii = h_X < 2.0 * h / p
    iii = h_X < h - c / p
    ii_upper = math.inf if h_X == 0 else 2.0 * h / h_X
    iii_lower = c / (h - h_X) if h > h_X else None
    p_star = c / h
    p0 = max(2.0, p_star)
    residuals = {}
    if math.isfinite(ii_upper):
        residuals["ii"] = abs(2.0 * h / ii_upper - h_X)
    if iii_lower is not None:
        residuals["iii"] = abs(h - c / iii_lower - h_X)
    crossing_p = 2.0 * (h + c / 2.0) / h
    crossing_hx = 2.0 * h / crossing_p
    return CriteriaReport(
        k=k,
        h=h,
        ell=ell,
        h_X=h_X,
        p=p,
        ii_holds=ii,
        iii_holds=iii,
        ii_upper=ii_upper,
        iii_lower=iii_lower,
        p0=p0,
        p0_attained=p_star < 2.0,
        crossing_p=crossing_p,
        crossing_h_X=crossing_hx,
        endpoint_residuals=residuals,
    )
