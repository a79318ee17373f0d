"""Finitely supported elements of l^1(G; A) for A = M_d(C) with a G-action.

The action is given per generator by a signed permutation matrix ``U`` and
acts by conjugation, ``alpha_s(M) = U_s M U_s^T``.  ``d == 1`` is the scalar
case, where every action is trivial.

Multiplication and involution are the crossed-product ones::

    (f * g)(t) = sum_s f(s) alpha_s(g(s^-1 t))
    f^*(s)     = alpha_s(f(s^-1)^*)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import PreconditionError, StructuralError
from .group import CyclicGroup, FreeGroup, GroupSpec, ProductGroup, parse_group


def generator_count(group: GroupSpec) -> int:
    if isinstance(group, FreeGroup):
        return group.k
    if isinstance(group, CyclicGroup):
        return 1
    return sum(generator_count(f) for f in group.factors)


def _is_signed_permutation(U: np.ndarray) -> bool:
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    if not np.all(np.isin(U, (-1.0, 0.0, 1.0))):
        return False
    nz = U != 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def signed_permutation(targets: Iterable[int]) -> np.ndarray:
    """Matrix with ``U e_j = sign(t_j) e_|t_j|`` (1-based targets)."""
    targets = list(targets)
    d = len(targets)
    U = np.zeros((d, d))
    for j, t in enumerate(targets):
        if t == 0 or abs(t) > d:
            raise PreconditionError(f"bad signed-permutation target {t} for dimension {d}")
        U[abs(t) - 1, j] = 1.0 if t > 0 else -1.0
    if not _is_signed_permutation(U):
        raise PreconditionError(f"targets {targets} do not define a permutation")
    return U


@dataclass(frozen=True, eq=False)
class Action:
    """Action of ``group`` on M_d by conjugation with signed permutations."""

    group: GroupSpec
    dim: int
    generators: tuple[np.ndarray, ...]
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise PreconditionError("coefficient dimension must be >= 1")
        if len(self.generators) != generator_count(self.group):
            raise PreconditionError(
                f"{self.group} needs {generator_count(self.group)} generator matrices, "
                f"got {len(self.generators)}"
            )
        for U in self.generators:
            U.setflags(write=False)
            if U.shape != (self.dim, self.dim) or not _is_signed_permutation(U):
                raise PreconditionError("generator matrices must be d x d signed permutations")
        self._check_relations()

    @classmethod
    def trivial(cls, group: GroupSpec, dim: int = 1) -> "Action":
        eye = np.eye(dim)
        return cls(group, dim, tuple(eye.copy() for _ in range(generator_count(group))), "trivial")

    @classmethod
    def swap(cls, group: GroupSpec, dim: int = 2) -> "Action":
        """Every generator reverses the coordinate order."""
        J = np.eye(dim)[::-1].copy()
        return cls(group, dim, tuple(J.copy() for _ in range(generator_count(group))), "swap")

    @property
    def is_trivial(self) -> bool:
        return all(np.array_equal(U, np.eye(self.dim)) for U in self.generators)

    def __eq__(self, other):
        if not isinstance(other, Action):
            return NotImplemented
        return (
            self.group == other.group
            and self.dim == other.dim
            and all(np.array_equal(a, b) for a, b in zip(self.generators, other.generators))
        )

    def __hash__(self):
        return hash((self.group, self.dim))

    def _factor_slices(self):
        start = 0
        for f in self.group.factors:
            n = generator_count(f)
            yield f, self.generators[start : start + n]
            start += n

    def _check_relations(self):
        eye = np.eye(self.dim)
        if isinstance(self.group, CyclicGroup):
            if not np.array_equal(np.linalg.matrix_power(self.generators[0], self.group.n), eye):
                raise PreconditionError(f"generator matrix does not have order dividing {self.group.n}")
        elif isinstance(self.group, ProductGroup):
            blocks = list(self._factor_slices())
            for i, (fi, gi) in enumerate(blocks):
                if isinstance(fi, CyclicGroup) and not np.array_equal(
                    np.linalg.matrix_power(gi[0], fi.n), eye
                ):
                    raise PreconditionError(f"factor {i} generator violates the relation of {fi}")
                for _, gj in blocks[i + 1 :]:
                    for A in gi:
                        for B in gj:
                            if not np.array_equal(A @ B, B @ A):
                                raise PreconditionError("generators of different factors must commute")

    def letter_unitary(self, code: int) -> np.ndarray:
        """Unitary of a free-group letter given by its code."""
        U = self.generators[code // 2]
        return U.T if code & 1 else U

    def unitary(self, value) -> np.ndarray:
        return _unitary(self.group, self.generators, value, self.dim)

    def apply(self, value, M: np.ndarray) -> np.ndarray:
        """``alpha_value(M)``."""
        if self.dim == 1:
            return M
        U = self.unitary(value)
        return U @ M @ U.T

    def to_json(self) -> Any:
        if self.name in ("trivial", "swap"):
            return self.name
        gens = []
        for U in self.generators:
            rows, cols = np.nonzero(U)
            t = [0] * self.dim
            for r, c in zip(rows, cols):
                t[c] = int((r + 1) * U[r, c])
            gens.append(t)
        return {"generators": gens}


def _unitary(group, generators, value, dim) -> np.ndarray:
    U = np.eye(dim)
    if isinstance(group, FreeGroup):
        for x in value:
            G = generators[abs(x) - 1]
            U = U @ (G if x > 0 else G.T)
    elif isinstance(group, CyclicGroup):
        U = np.linalg.matrix_power(generators[0], value)
    else:
        start = 0
        for f, v in zip(group.factors, value):
            n = generator_count(f)
            U = U @ _unitary(f, generators[start : start + n], v, dim)
            start += n
    return U


def parse_action(spec: Any, group: GroupSpec, dim: int) -> Action:
    if spec in (None, "trivial"):
        return Action.trivial(group, dim)
    if spec == "swap":
        return Action.swap(group, dim)
    if isinstance(spec, Mapping) and "generators" in spec:
        return Action(group, dim, tuple(signed_permutation(t) for t in spec["generators"]))
    raise PreconditionError(f"unrecognised action {spec!r}")


def _as_coefficient(c, dim: int) -> np.ndarray:
    M = np.asarray(c, dtype=complex)
    if M.ndim == 0:
        M = M * np.eye(dim) if dim > 1 else M.reshape(1, 1)
    if M.shape != (dim, dim):
        raise StructuralError(f"coefficient of shape {M.shape} in a dimension-{dim} algebra")
    return M


class AlgebraElement:
    """A finitely supported map from the group to d x d complex matrices."""

    __slots__ = ("group", "action", "terms")

    def __init__(self, group: GroupSpec, action: Action, terms: Mapping[Any, np.ndarray]):
        if action.group != group:
            raise StructuralError(f"action is for {action.group}, element lives in {group}")
        clean = {}
        for v in sorted(terms, key=group.sort_key):
            if not group.contains(v):
                raise PreconditionError(f"{v!r} is not an element of {group}")
            M = _as_coefficient(terms[v], action.dim).copy()
            if np.any(M != 0):
                M.setflags(write=False)
                clean[v] = M
        self.group = group
        self.action = action
        self.terms = clean

    @classmethod
    def from_terms(cls, group: GroupSpec, terms: Iterable[tuple[Any, Any]], action: Action | None = None, dim: int = 1):
        action = action or Action.trivial(group, dim)
        acc: dict = {}
        for word, c in terms:
            v = group.value(word)
            acc[v] = acc.get(v, 0) + _as_coefficient(c, action.dim)
        return cls(group, action, acc)

    @property
    def dim(self) -> int:
        return self.action.dim

    @property
    def support(self) -> list:
        return list(self.terms)

    @property
    def radius(self) -> int:
        return max((self.group.length(v) for v in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_real(self) -> bool:
        return all(np.all(M.imag == 0) for M in self.terms.values())

    def coefficient(self, word) -> np.ndarray:
        v = self.group.value(word)
        M = self.terms.get(v)
        return np.zeros((self.dim, self.dim), dtype=complex) if M is None else M

    def _check_compatible(self, other: "AlgebraElement"):
        if self.group != other.group:
            raise StructuralError(f"elements of {self.group} and {other.group}")
        if self.action != other.action:
            raise StructuralError("elements carry different actions or dimensions")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_compatible(other)
        acc = dict(self.terms)
        for v, M in other.terms.items():
            acc[v] = acc[v] + M if v in acc else M
        return AlgebraElement(self.group, self.action, acc)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self.group, self.action, {v: c * M for v, M in self.terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        keys = set(self.terms) | set(other.terms)
        return all(np.allclose(self.coefficient(v), other.coefficient(v), rtol=0, atol=atol) for v in keys)

    def __repr__(self):
        body = ", ".join(f"{self.group.format(v)}: {M.tolist() if self.dim > 1 else M[0, 0]}" for v, M in self.terms.items())
        return f"AlgebraElement({self.group}, d={self.dim}, {{{body}}})"


def delta(group: GroupSpec, word="", coeff=1.0, action: Action | None = None, dim: int = 1) -> AlgebraElement:
    return AlgebraElement.from_terms(group, [(word, coeff)], action=action, dim=dim)


def srw_element(group: GroupSpec) -> AlgebraElement:
    """Uniform probability on generators and their inverses, as a scalar element."""
    letters = group.letters()
    return AlgebraElement.from_terms(group, [(x, 1.0 / len(letters)) for x in letters])


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    f._check_compatible(g)
    G, act = f.group, f.action
    acc: dict = {}
    for s, F in f.terms.items():
        for u, Gu in g.terms.items():
            t = G.mul(s, u)
            term = F @ act.apply(s, Gu)
            acc[t] = acc[t] + term if t in acc else term
    return AlgebraElement(G, act, acc)


def involute(f: AlgebraElement) -> AlgebraElement:
    G, act = f.group, f.action
    acc = {}
    for u, M in f.terms.items():
        s = G.inv(u)
        acc[s] = act.apply(s, M.conj().T)
    return AlgebraElement(G, act, acc)


def coefficient_norm(M: np.ndarray) -> float:
    if M.shape == (1, 1):
        return float(abs(M[0, 0]))
    return float(np.linalg.norm(M, 2))


def l1_norm(f: AlgebraElement) -> float:
    return float(sum(coefficient_norm(M) for M in f.terms.values()))


def element_from_json(obj: Mapping | str, group: GroupSpec | None = None) -> AlgebraElement:
    """Read the element file format.

    ``{"group": "free:2", "dim": 1, "action": "trivial",
    "terms": [{"word": "aB", "re": 1.0, "im": 0.0}]}``; for ``dim > 1`` the
    ``re``/``im`` entries are row-major arrays of length ``dim**2``.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        file_group = parse_group(obj["group"]) if "group" in obj else None
        if group is not None and file_group is not None and file_group != group:
            raise StructuralError(f"element file is for {file_group}, requested {group}")
        group = group or file_group
        if group is None:
            raise PreconditionError("no group given for the element")
        dim = int(obj.get("dim", 1))
        action = parse_action(obj.get("action", "trivial"), group, dim)
        terms = []
        for t in obj["terms"]:
            re = np.asarray(t.get("re", 0.0), dtype=float)
            im = np.asarray(t.get("im", 0.0), dtype=float)
            c = re + 1j * im
            if dim > 1:
                if c.size != dim * dim:
                    raise StructuralError(f"term {t.get('word')!r} needs {dim * dim} entries")
                c = c.reshape(dim, dim)
            terms.append((t["word"], c))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"malformed element file: {exc}") from exc
    return AlgebraElement.from_terms(group, terms, action=action)


def element_to_json(f: AlgebraElement) -> dict:
    terms = []
    for v, M in f.terms.items():
        if f.dim == 1:
            terms.append({"word": f.group.format(v), "re": float(M[0, 0].real), "im": float(M[0, 0].imag)})
        else:
            flat = M.reshape(-1)
            terms.append({"word": f.group.format(v), "re": flat.real.tolist(), "im": flat.imag.tolist()})
    return {"group": str(f.group), "dim": f.dim, "action": f.action.to_json(), "terms": terms}


def ball_unitaries(ball, action: Action) -> np.ndarray | None:
    """``U_h`` for every ball element, shape (N, d, d); None for trivial actions."""
    if action.dim == 1 or action.is_trivial:
        return None
    d = action.dim
    N = ball.size
    U = np.empty((N, d, d))
    U[0] = np.eye(d)
    if isinstance(ball.group, FreeGroup):
        letters = np.stack([action.letter_unitary(c) for c in range(2 * ball.group.k)])
        for n in range(1, ball.radius + 1):
            sl = slice(int(ball.offsets[n]), int(ball.offsets[n + 1]))
            U[sl] = letters[ball.first[sl]] @ U[ball.tail[sl]]
    else:
        for i, v in enumerate(ball.values()):
            U[i] = action.unitary(v)
    return U

