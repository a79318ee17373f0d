"""Truncated covariant convolution operators and their p -> p norms.

For an element ``f`` and a ball ``B`` of radius ``R`` the operator acts on
``l^p(B; C^d (x) C^m)`` by::

    (T xi)(h) = sum_g  U_h^T f(g) U_h  xi(g^-1 h)      (terms leaving B dropped)

which is the compression of the ``pi``-valued regular covariant
representation (``pi`` = identity representation of M_d, amplified ``m``
times).  Vectors are arrays of shape ``(N, d, m)``; the norm of ``l^p(B; H)``
takes the Hilbert norm of each ``(d, m)`` block and the l^p norm across the
ball.

Lower bounds come only from explicit witnesses supported in the inner ball of
radius ``R - radius(f)``, where truncation is exact; upper bounds come only
from ``l1_norm(f)``, the exact anchors ``p in {1, 2, inf}`` of the truncation
and Riesz-Thorin interpolation between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh

from .algebra import AlgebraElement, ball_unitaries, coefficient_norm, involute, l1_norm
from .errors import InvariantViolation, PreconditionError
from .group import BallIndex, ProductGroup, enumerate_ball

DENSE_LIMIT = 1500
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True)
class PExponent:
    """An exponent together with its conjugate; ``conjugate()`` swaps them exactly."""

    p: float
    q: float

    @classmethod
    def of(cls, p: float) -> "PExponent":
        p = float(p)
        if p == 1.0:
            return cls(1.0, math.inf)
        if math.isinf(p):
            return cls(math.inf, 1.0)
        if not p > 1.0:
            raise PreconditionError(f"exponent must be >= 1, got {p}")
        return cls(p, p / (p - 1.0))

    def conjugate(self) -> "PExponent":
        return PExponent(self.q, self.p)


def conjugate(p: float) -> float:
    return PExponent.of(p).q


def block_norms(x: np.ndarray) -> np.ndarray:
    """Hilbert norm of every block ``x[h]``."""
    flat = x.reshape(x.shape[0], -1)
    return np.sqrt(np.sum(flat.real**2 + flat.imag**2, axis=1)) if np.iscomplexobj(flat) else np.sqrt(np.sum(flat**2, axis=1))


def lp_of_norms(b: np.ndarray, p: float) -> float:
    if b.size == 0:
        return 0.0
    top = float(b.max())
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    if p == 1.0:
        return float(math.fsum(b))
    return top * float(np.sum((b / top) ** p)) ** (1.0 / p)


def lp_norm(x: np.ndarray, p: float) -> float:
    """Norm of ``l^p(ball; H)`` for an array whose first axis indexes the ball."""
    return lp_of_norms(block_norms(x), p)


def dual_vector(y: np.ndarray, p: float) -> np.ndarray:
    """The norming functional of ``y``: unit in ``l^q`` with ``<y, J> = ||y||_p``."""
    b = block_norms(y)
    nrm = lp_of_norms(b, p)
    if nrm == 0.0:
        return np.zeros_like(y)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        scale = np.where(b > 0, (b / nrm) ** (p - 1.0) / np.where(b > 0, b, 1.0), 0.0)
    return y * scale.reshape((-1,) + (1,) * (y.ndim - 1))


class TruncatedOperator:
    """Compression of ``pi~ x| lambda^p (f)`` to a Cayley ball.

    The operator is the same for every p; only the norm changes.  Application
    never materializes the matrix: each support element ``g`` contributes a
    gather along the precomputed map ``h -> g^-1 h``.
    """

    def __init__(self, f: AlgebraElement, radius: int, m: int = 1, ball: BallIndex | None = None, cap: int | None = None):
        if m < 1:
            raise PreconditionError(f"amplification must be >= 1, got {m}")
        if radius < f.radius:
            raise PreconditionError(f"radius {radius} is smaller than the support radius {f.radius} of f")
        if ball is None:
            ball = enumerate_ball(f.group, radius, cap)
        elif ball.group != f.group or ball.radius != radius:
            raise PreconditionError("ball does not match the element's group and radius")
        self.f = f
        self.ball = ball
        self.radius = radius
        self.m = m
        self.d = f.dim
        self.witness_radius = radius - f.radius
        self.inner = ball.inner_size(self.witness_radius)
        self.dtype = np.float64 if f.is_real else np.complex128
        self._U = ball_unitaries(ball, f.action)
        G = f.group
        self._terms = []
        for g, M in f.terms.items():
            idx = ball.left_mul_map(G.inv(g))
            rows = np.nonzero(idx >= 0)[0]
            cols = idx[rows]
            coeff = M.real.copy() if f.is_real else M
            self._terms.append((g, coeff, rows, cols))
        self._cache: dict[Any, Any] = {}

    @property
    def N(self) -> int:
        return self.ball.size

    @property
    def block_shape(self) -> tuple[int, int]:
        return (self.d, self.m)

    @property
    def is_hermitian(self) -> bool:
        if "herm" not in self._cache:
            self._cache["herm"] = self.f.allclose(involute(self.f), atol=0.0)
        return self._cache["herm"]

    @property
    def anchors_exact(self) -> bool:
        """Whether the p=1 and p=inf anchors are exact (scalar blocks)."""
        if self.d == 1:
            return True
        eye = np.eye(self.d)
        return all(np.array_equal(M, M[0, 0] * eye) for M in self.f.terms.values())

    def zeros(self, inner: bool = False, dtype=None) -> np.ndarray:
        n = self.inner if inner else self.N
        return np.zeros((n, self.d, self.m), dtype=dtype or self.dtype)

    def embed(self, x_inner: np.ndarray) -> np.ndarray:
        x = np.zeros((self.N,) + x_inner.shape[1:], dtype=x_inner.dtype)
        x[: x_inner.shape[0]] = x_inner
        return x

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply T to a full-ball vector, or to an inner-ball vector (zero-extended)."""
        if x.shape[0] != self.N:
            x = self.embed(x)
        out = np.zeros(x.shape, dtype=np.result_type(self.dtype, x.dtype))
        for _, M, rows, cols in self._terms:
            if self.d == 1:
                out[rows] += M[0, 0] * x[cols]
                continue
            v = x[cols]
            if self._U is None:
                out[rows] += M @ v
            else:
                U = self._U[rows]
                out[rows] += np.transpose(U, (0, 2, 1)) @ (M @ (U @ v))
        return out

    def rmatvec(self, y: np.ndarray, inner: bool = False) -> np.ndarray:
        """Apply the conjugate transpose; with ``inner`` keep only the inner-ball part."""
        out = np.zeros(y.shape, dtype=np.result_type(self.dtype, y.dtype))
        for _, M, rows, cols in self._terms:
            MH = M.conj().T
            if self.d == 1:
                out[cols] += MH[0, 0] * y[rows]
                continue
            v = y[rows]
            if self._U is None:
                out[cols] += MH @ v
            else:
                U = self._U[rows]
                out[cols] += np.transpose(U, (0, 2, 1)) @ (MH @ (U @ v))
        return out[: self.inner] if inner else out

    def linear_operator(self, restricted: bool = False) -> LinearOperator:
        n_out = self.N * self.d * self.m
        n_in = (self.inner if restricted else self.N) * self.d * self.m
        shape_in = (n_in // (self.d * self.m), self.d, self.m)
        shape_out = (self.N, self.d, self.m)
        dtype = np.complex128 if self.dtype == np.complex128 else np.float64

        def mv(v):
            return self.matvec(np.asarray(v).reshape(shape_in)).reshape(-1)

        def rmv(v):
            return self.rmatvec(np.asarray(v).reshape(shape_out), inner=restricted).reshape(-1)

        return LinearOperator((n_out, n_in), matvec=mv, rmatvec=rmv, dtype=dtype)

    def to_sparse(self) -> sp.csr_matrix:
        """Materialize the truncation as a sparse matrix in the flattened layout."""
        d, m, N = self.d, self.m, self.N
        r_all, c_all, v_all = [], [], []
        a = np.arange(d)
        for _, M, rows, cols in self._terms:
            if self._U is None:
                blocks = np.broadcast_to(M, (len(rows), d, d))
            else:
                U = self._U[rows]
                blocks = np.transpose(U, (0, 2, 1)) @ M @ U
            r_all.append((rows[:, None, None] * d + a[None, :, None] + 0 * a[None, None, :]).reshape(-1))
            c_all.append((cols[:, None, None] * d + a[None, None, :] + 0 * a[None, :, None]).reshape(-1))
            v_all.append(np.asarray(blocks).reshape(-1))
        if r_all:
            A = sp.coo_matrix(
                (np.concatenate(v_all), (np.concatenate(r_all), np.concatenate(c_all))), shape=(N * d, N * d)
            ).tocsr()
        else:
            A = sp.csr_matrix((N * d, N * d), dtype=self.dtype)
        if m > 1:
            A = sp.kron(A, sp.identity(m), format="csr")
        A.eliminate_zeros()
        return A

    def block_sums(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-column and per-row sums of block operator norms."""
        if "sums" not in self._cache:
            col = np.zeros(self.N)
            row = np.zeros(self.N)
            for _, M, rows, cols in self._terms:
                nrm = coefficient_norm(M)
                col[cols] += nrm
                row[rows] += nrm
            self._cache["sums"] = (col, row)
        return self._cache["sums"]


def build_truncated(f: AlgebraElement, radius: int, m: int = 1, cap: int | None = None) -> TruncatedOperator:
    return TruncatedOperator(f, radius, m=m, cap=cap)


def _top_singular(T: TruncatedOperator, restricted: bool) -> tuple[float, np.ndarray]:
    """Largest singular value of T (or of T restricted to the inner ball) and its right vector."""
    n_in = (T.inner if restricted else T.N) * T.d * T.m
    shape_in = (n_in // (T.d * T.m), T.d, T.m)
    if n_in == 0:
        return 0.0, np.zeros(shape_in)
    if n_in <= DENSE_LIMIT:
        A = T.to_sparse()
        if restricted:
            A = A[:, :n_in]
        _, s, vh = np.linalg.svd(A.toarray())
        return float(s[0]), vh[0].conj().reshape(shape_in)
    dtype = np.complex128 if T.dtype == np.complex128 else np.float64
    v0 = np.linspace(1.0, 2.0, n_in)
    if T.is_hermitian and not restricted:
        op = T.linear_operator()
        vals, vecs = eigsh(op, k=2, which="BE", tol=SPECTRAL_TOL, v0=v0, ncv=min(n_in, 40))
        j = int(np.argmax(np.abs(vals)))
        return float(abs(vals[j])), vecs[:, j].reshape(shape_in)
    op = T.linear_operator(restricted)
    normal = LinearOperator((n_in, n_in), matvec=lambda v: op.rmatvec(op.matvec(v)), dtype=dtype)
    vals, vecs = eigsh(normal, k=1, which="LA", tol=SPECTRAL_TOL, v0=v0, ncv=min(n_in, 40))
    return float(math.sqrt(max(vals[0], 0.0))), vecs[:, 0].reshape(shape_in)


def pnorm_anchor(T: TruncatedOperator, p: float) -> float:
    """Norm of the truncation at an anchor exponent.

    ``p=1``/``p=inf`` are the maximal column/row sums of block norms (exact
    when ``T.anchors_exact``, an upper bound otherwise); ``p=2`` is the
    largest singular value, to solver tolerance for large balls.
    """
    p = float(p)
    key = ("anchor", p)
    if key in T._cache:
        return T._cache[key]
    if p == 1.0:
        val = float(T.block_sums()[0].max(initial=0.0))
    elif math.isinf(p):
        val = float(T.block_sums()[1].max(initial=0.0))
    elif p == 2.0:
        s, v = _top_singular(T, restricted=False)
        # a Ritz value sits below the true top singular value; so does the witness quotient
        if s > 0:
            val = max(s, lp_norm(T.matvec(v), 2.0) / lp_norm(v, 2.0))
        else:
            val = 0.0
    else:
        raise PreconditionError(f"anchors exist only for p in {{1, 2, inf}}, got {p}")
    T._cache[key] = val
    return val


def interpolation_bound(n_p0: float, n_p1: float, p0: float, p1: float, p: float) -> float:
    """Riesz-Thorin: ``N_p0^(1-theta) N_p1^theta`` with ``1/p = (1-theta)/p0 + theta/p1``."""
    if not p0 < p1:
        raise PreconditionError(f"need p0 < p1, got {p0}, {p1}")
    if not p0 <= p <= p1:
        raise PreconditionError(f"target exponent {p} outside [{p0}, {p1}]")
    inv0, inv1 = 1.0 / p0, (0.0 if math.isinf(p1) else 1.0 / p1)
    inv = 0.0 if math.isinf(p) else 1.0 / p
    theta = (inv0 - inv) / (inv0 - inv1)
    if n_p0 == n_p1:
        return float(n_p0)
    return float(n_p0 ** (1.0 - theta) * n_p1**theta)


def upper_bounds(T: TruncatedOperator, p: float) -> list[tuple[float, str]]:
    """All certified upper bounds for the p-norm of the truncation."""
    n1, ninf = pnorm_anchor(T, 1.0), pnorm_anchor(T, math.inf)
    n2 = pnorm_anchor(T, 2.0)
    out = [(l1_norm(T.f), "l1")]
    if p == 1.0:
        out.append((n1, "anchor(1)"))
    elif math.isinf(p):
        out.append((ninf, "anchor(inf)"))
    else:
        out.append((interpolation_bound(n1, ninf, 1.0, math.inf, p), "riesz-thorin(1,inf)"))
        if p < 2.0:
            out.append((interpolation_bound(n1, n2, 1.0, 2.0, p), "riesz-thorin(1,2)"))
        elif p > 2.0:
            out.append((interpolation_bound(n2, ninf, 2.0, math.inf, p), "riesz-thorin(2,inf)"))
        else:
            out.append((n2, "anchor(2)"))
    return out


@dataclass
class NormEstimate:
    p: float
    q: float
    lower: float
    upper: float
    radius: int
    method: list[str]
    witness_seed: int | None
    converged: bool
    iterations: int
    witness_id: str = ""
    witness: np.ndarray | None = field(default=None, repr=False, compare=False)
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        def num(x):
            return "inf" if isinstance(x, float) and math.isinf(x) else x

        out = {
            "p": num(self.p),
            "q": num(self.q),
            "lower": self.lower,
            "upper": self.upper,
            "radius": self.radius,
            "method": list(self.method),
            "witness_seed": self.witness_seed,
            "witness": self.witness_id,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if self.details:
            out["details"] = self.details
        return out


def _check_sandwich(est: NormEstimate) -> NormEstimate:
    if est.lower > est.upper:
        # only the p=2 anchor is inexact (Lanczos); tolerate its solver slack
        if est.lower - est.upper <= 1e-9 * max(1.0, est.upper):
            est.upper = est.lower
        else:
            raise InvariantViolation(f"lower bound {est.lower} exceeds upper bound {est.upper} at p={est.p}")
    return est


def _start_vectors(T: TruncatedOperator, restarts: int, seed: int) -> list[tuple[str, np.ndarray]]:
    shape = (T.inner, T.d, T.m)
    out = []
    e = np.zeros(shape)
    e[0, 0, 0] = 1.0
    out.append(("identity", e))
    if restarts >= 2:
        out.append(("uniform", np.ones(shape)))
    n_random = max(restarts - 2, 0)
    for i, ss in enumerate(np.random.SeedSequence(seed).spawn(n_random)):
        rng = np.random.default_rng(ss)
        out.append((f"random-{i}", rng.choice([-1.0, 1.0], size=shape)))
    return out[: max(restarts, 1)]


def _boyd_run(T: TruncatedOperator, p: float, x0: np.ndarray, tol: float, max_iter: int):
    """Duality-map power iteration from ``x0``; returns best quotient, witness, iterations, converged."""
    q = conjugate(p)
    x = x0 / lp_norm(x0, p)
    y = T.matvec(x)
    best, best_x = lp_norm(y, p), x
    prev = best
    for it in range(1, max_iter + 1):
        if prev == 0.0:
            return best, best_x, it - 1, True
        z = T.rmatvec(dual_vector(y, p), inner=True)
        if lp_norm(z, q) == 0.0:
            return best, best_x, it, True
        x = dual_vector(z, q)
        y = T.matvec(x)
        val = lp_norm(y, p) / lp_norm(x, p)
        if val > best:
            best, best_x = val, x
        if abs(val - prev) < tol:
            return best, best_x, it, True
        prev = val
    return best, best_x, max_iter, False


def pnorm_boyd(
    T: TruncatedOperator,
    p: float,
    restarts: int = 8,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
    initial: Sequence[np.ndarray] = (),
) -> NormEstimate:
    """Certified bounds for the p-norm of the truncation.

    ``lower`` is the best quotient ``||T x||_p / ||x||_p`` over witnesses
    supported in the inner ball, which is also a lower bound for the
    untruncated operator.  ``initial`` adds caller-supplied witnesses (shape
    ``(T.inner, d, m)``) to the restarts.
    """
    pe = PExponent.of(p)
    if not 1.0 < pe.p < math.inf:
        raise PreconditionError(f"the power method needs 1 < p < inf, got {p}")
    p = pe.p
    if T.f.is_zero:
        return NormEstimate(p, pe.q, 0.0, 0.0, T.radius, ["zero"], seed, True, 0)
    bounds = upper_bounds(T, p)
    upper, up_tag = min(bounds)
    best, best_x, best_id = -1.0, None, ""
    iterations, converged = 0, True
    candidates: list[tuple[str, np.ndarray]] = [(f"initial-{i}", np.asarray(x)) for i, x in enumerate(initial)]
    if p == 2.0:
        method = ["lanczos-witness"]
        s, v = _top_singular(T, restricted=True)
        if s > 0:
            candidates.append(("lanczos", v))
        for wid, x in candidates:
            if lp_norm(x, p) == 0.0:
                continue
            val = lp_norm(T.matvec(x), p) / lp_norm(x, p)
            if val > best:
                best, best_x, best_id = val, x / lp_norm(x, p), wid
    else:
        method = ["boyd-power"]
        for wid, x0 in candidates + _start_vectors(T, restarts, seed):
            if lp_norm(x0, p) == 0.0:
                continue
            val, x, it, conv = _boyd_run(T, p, x0, tol, max_iter)
            iterations += it
            if val > best:
                best, best_x, best_id, converged = val, x, wid, conv
    best = max(best, 0.0)
    est = NormEstimate(
        p=p,
        q=pe.q,
        lower=float(best),
        upper=float(upper),
        radius=T.radius,
        method=method + [f"upper:{up_tag}", "upper-scope:truncation", f"witness-radius:{T.witness_radius}"],
        witness_seed=seed,
        converged=converged,
        iterations=iterations,
        witness_id=best_id,
        witness=best_x,
    )
    return _check_sandwich(est)


def pf_norm(
    f: AlgebraElement,
    p: float,
    radius: int,
    m: int = 1,
    restarts: int = 8,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
    cap: int | None = None,
    operator: TruncatedOperator | None = None,
) -> NormEstimate:
    """Single-representation PF norm: ``max(||T_f||_p, ||T_f||_q)`` on the truncation."""
    pe = PExponent.of(p)
    T = operator if operator is not None else build_truncated(f, radius, m=m, cap=cap)
    kw = dict(restarts=restarts, tol=tol, max_iter=max_iter, seed=seed)
    est_p = pnorm_boyd(T, pe.p, **kw)
    est_q = est_p if pe.p == 2.0 else pnorm_boyd(T, pe.q, **kw)
    best = est_p if est_p.lower >= est_q.lower else est_q
    est = NormEstimate(
        p=pe.p,
        q=pe.q,
        lower=max(est_p.lower, est_q.lower),
        upper=max(est_p.upper, est_q.upper),
        radius=T.radius,
        method=["pf-max(p,q)", "single-representation"] + est_p.method + ([] if est_q is est_p else est_q.method),
        witness_seed=seed,
        converged=est_p.converged and est_q.converged,
        iterations=est_p.iterations + (0 if est_q is est_p else est_q.iterations),
        witness_id=f"{'p' if best is est_p else 'q'}:{best.witness_id}",
        witness=best.witness,
        details={
            "norm_p": {"lower": est_p.lower, "upper": est_p.upper},
            "norm_q": {"lower": est_q.lower, "upper": est_q.upper},
            "amplification": T.m,
            "l1": l1_norm(T.f),
        },
    )
    return _check_sandwich(est)


def transpose_dual_check(
    T_f: TruncatedOperator, T_fstar: TruncatedOperator, p: float, seed: int = 0, **boyd_kw
) -> dict:
    """Compare ``||T_f||_p`` with ``||T_{f*}||_q`` on matched truncations."""
    if T_f.radius != T_fstar.radius or T_f.m != T_fstar.m:
        raise PreconditionError("truncations must share radius and amplification")
    if not T_fstar.f.allclose(involute(T_f.f), atol=1e-14):
        raise PreconditionError("second operator must be built from involute(f)")
    pe = PExponent.of(p)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((T_f.N, T_f.d, T_f.m))
    adjoint_residual = float(np.max(np.abs(T_f.rmatvec(y) - T_fstar.matvec(y)), initial=0.0))
    d1 = abs(pnorm_anchor(T_f, 1.0) - pnorm_anchor(T_fstar, math.inf))
    dinf = abs(pnorm_anchor(T_f, math.inf) - pnorm_anchor(T_fstar, 1.0))
    d2 = abs(pnorm_anchor(T_f, 2.0) - pnorm_anchor(T_fstar, 2.0))
    report = {
        "p": pe.p,
        "q": pe.q,
        "adjoint_residual": adjoint_residual,
        "anchor_1_vs_inf": d1,
        "anchor_inf_vs_1": dinf,
        "anchor_2": d2,
    }
    if pe.p in (1.0, 2.0) or math.isinf(pe.p):
        lhs = pnorm_anchor(T_f, pe.p)
        rhs = pnorm_anchor(T_fstar, pe.q)
        report.update(lhs=lhs, rhs=rhs, difference=abs(lhs - rhs))
    else:
        a = pnorm_boyd(T_f, pe.p, seed=seed, **boyd_kw)
        b = pnorm_boyd(T_fstar, pe.q, seed=seed, **boyd_kw)
        report.update(
            lhs=[a.lower, a.upper],
            rhs=[b.lower, b.upper],
            difference=abs(a.lower - b.lower),
            intervals_overlap=bool(max(a.lower, b.lower) <= min(a.upper, b.upper) + 1e-9),
        )
    report["passed"] = bool(d1 < 1e-12 and dinf < 1e-12 and d2 <= 1e-9 and adjoint_residual < 1e-12)
    return report


def matrix_norms(M) -> dict[str, float]:
    """Exact 1, 2 and inf operator norms of a (sparse or dense) matrix."""
    A = sp.csr_matrix(M)
    absA = abs(A)
    n1 = float(absA.sum(axis=0).max()) if A.nnz else 0.0
    ninf = float(absA.sum(axis=1).max()) if A.nnz else 0.0
    n2 = float(np.linalg.norm(A.toarray(), 2)) if min(A.shape) else 0.0
    return {"1": n1, "2": n2, "inf": ninf}


def monotonicity_scan(
    f: AlgebraElement,
    ps: Sequence[float],
    radius: int,
    m: int = 1,
    restarts: int = 8,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
    slack: float = 1e-6,
    operator: TruncatedOperator | None = None,
) -> dict:
    """PF-norm curve over ``ps`` in (1, 2] with the pairwise monotonicity check."""
    ps = [float(p) for p in ps]
    if ps != sorted(ps):
        raise PreconditionError("exponents must be sorted ascending")
    if any(not 1.0 < p <= 2.0 for p in ps):
        raise PreconditionError("exponents must lie in (1, 2]")
    T = operator if operator is not None else build_truncated(f, radius, m=m)
    ests = [pf_norm(f, p, radius, restarts=restarts, tol=tol, max_iter=max_iter, seed=seed, operator=T) for p in ps]
    pairs = []
    for a, b in zip(ests, ests[1:]):
        pairs.append(
            {"p": a.p, "p_next": b.p, "lower_next": b.lower, "upper": a.upper, "holds": bool(b.lower <= a.upper + slack)}
        )
    n1, n2, ninf = pnorm_anchor(T, 1.0), pnorm_anchor(T, 2.0), pnorm_anchor(T, math.inf)
    anchor = {
        "n1": n1,
        "n2": n2,
        "ninf": ninf,
        "n2_le_max": bool(n2 <= max(n1, ninf) * (1 + 1e-12)),
        "n2_le_geometric_mean": bool(n2 <= math.sqrt(n1 * ninf) * (1 + 1e-12)),
    }
    curve = [{"p": e.p, "q": e.q, "lower": e.lower, "upper": e.upper, "converged": e.converged} for e in ests]
    return {
        "radius": radius,
        "curve": curve,
        "pairs": pairs,
        "anchors": anchor,
        "passed": all(x["holds"] for x in pairs) and anchor["n2_le_max"] and anchor["n2_le_geometric_mean"],
    }


def amplification_check(
    f: AlgebraElement,
    m: int,
    p: float,
    radius: int,
    restarts: int = 8,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
) -> dict:
    """Compare estimates with amplification ``m`` and without.

    The m=1 witness embedded as ``xi (x) e_1`` seeds the amplified search, so
    the direction ``N(m) >= N(1)`` holds exactly for the reported lower bounds.
    """
    if m < 1:
        raise PreconditionError("amplification must be >= 1")
    kw = dict(restarts=restarts, tol=tol, max_iter=max_iter, seed=seed)
    T1 = build_truncated(f, radius, m=1)
    e1 = pnorm_boyd(T1, p, **kw)
    if m == 1:
        em = e1
    else:
        Tm = TruncatedOperator(f, radius, m=m, ball=T1.ball)
        init = []
        if e1.witness is not None:
            w = np.zeros((T1.inner, T1.d, m), dtype=e1.witness.dtype)
            w[:, :, :1] = e1.witness
            init.append(w)
        em = pnorm_boyd(Tm, p, initial=init, **kw)
    ratio = em.lower / e1.lower if e1.lower > 0 else 1.0
    report = {
        "p": float(p),
        "m": m,
        "radius": radius,
        "lower_m1": e1.lower,
        "lower_m": em.lower,
        "upper_m1": e1.upper,
        "upper_m": em.upper,
        "ratio": ratio,
        "direction_holds": bool(em.lower >= e1.lower - 1e-9),
    }
    if float(p) == 2.0:
        report["isometric_at_2"] = bool(abs(em.lower - e1.lower) <= 1e-9)
    report["passed"] = report["direction_holds"] and report.get("isometric_at_2", True)
    return report


def tensor_power_check(
    f: AlgebraElement,
    xi: Mapping[Any, Iterable[complex]],
    p: float,
    radius: int | None = None,
    m: int = 2,
    atol: float = 1e-10,
) -> dict:
    """Check ``||x_m eta_m||_p = ||lambda(f) xi||_p^m`` and ``||eta_m||_p = 1``.

    The left side uses the truncated operator on ``G`` with amplification
    ``N``; the right side is evaluated from the defining sums on the product
    group ``G^m``.
    """
    if f.dim != 1:
        raise PreconditionError("the tensor-power identity is for scalar elements")
    if m < 2:
        raise PreconditionError("tensor power must be >= 2")
    G = f.group
    vecs = {G.value(k): np.asarray(list(v), dtype=complex) for k, v in xi.items()}
    vecs = {k: v for k, v in vecs.items() if np.any(v != 0)}
    if not vecs:
        raise PreconditionError("xi must be nonzero")
    n_dim = len(next(iter(vecs.values())))
    if any(len(v) != n_dim for v in vecs.values()):
        raise PreconditionError("all xi values must have the same dimension")
    r_xi = max(G.length(k) for k in vecs)
    need = f.radius + r_xi
    radius = need if radius is None else radius
    if radius < need:
        raise PreconditionError(f"radius {radius} cannot hold supp(f)supp(xi); need {need}")
    scale = lp_of_norms(np.array([np.linalg.norm(v) for v in vecs.values()]), p)
    vecs = {k: v / scale for k, v in vecs.items()}

    T = build_truncated(f, radius, m=n_dim)
    X = T.zeros(dtype=complex)
    for k, v in vecs.items():
        X[T.ball.index(k), 0, :] = v
    base = lp_norm(T.matvec(X), p)
    lhs = base**m

    P = ProductGroup((G,) * m)
    eta: dict = {(): np.ones(1, dtype=complex)}
    F: dict = {(): 1.0 + 0j}
    for _ in range(m):
        eta = {a + (k,): np.kron(va, vb) for a, va in eta.items() for k, vb in vecs.items()}
        F = {a + (g,): ca * M[0, 0] for a, ca in F.items() for g, M in f.terms.items()}
    eta_norm = math.fsum(np.linalg.norm(v) ** p for v in eta.values()) ** (1.0 / p)
    acc: dict = {}
    for h, c in F.items():
        for u, v in eta.items():
            t = P.mul(h, u)
            acc[t] = acc[t] + c * v if t in acc else c * v
    rhs = math.fsum(np.linalg.norm(v) ** p for v in acc.values()) ** (1.0 / p)
    tol = atol * max(1.0, lhs)
    return {
        "p": float(p),
        "m": m,
        "N": n_dim,
        "radius": radius,
        "lhs": lhs,
        "rhs": rhs,
        "difference": abs(lhs - rhs),
        "eta_norm": eta_norm,
        "passed": bool(abs(lhs - rhs) <= tol and abs(eta_norm - 1.0) <= atol),
    }
