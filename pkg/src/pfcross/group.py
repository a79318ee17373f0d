"""Finitely generated groups: free groups, cyclic groups and direct products.

Elements are plain hashable values (tuples of signed generator indices for
free groups, residues for cyclic groups, tuples of factor values for
products).  :class:`GroupElement` wraps a value together with its group for
the public, type-checked API; the hot loops work on raw values.

Letters of a free group are also addressed by an integer *code*: generator
``i`` (1-based) has code ``2*(i-1)`` and its inverse ``2*(i-1)+1``, so the
inverse of code ``c`` is ``c ^ 1`` and the alphabet order is ``a < A < b < B``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import PreconditionError, ResourceError, StructuralError

DEFAULT_MEM_CAP = 20_000_000
MAX_GENERATORS = 32767  # words are stored as signed 16-bit letters


def memory_cap(cap: int | None = None) -> int:
    """Element cap: explicit argument, else ``PF_MEM_CAP``, else the default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("PF_MEM_CAP")
    if env:
        try:
            return int(float(env))
        except ValueError as exc:
            raise PreconditionError(f"PF_MEM_CAP is not a number: {env!r}") from exc
    return DEFAULT_MEM_CAP


def _letter_char(signed: int) -> str:
    i = abs(signed)
    if i > 26:
        raise PreconditionError(f"generator {i} has no single-letter literal")
    ch = chr(ord("a") + i - 1)
    return ch if signed > 0 else ch.upper()


def code_of(signed: int) -> int:
    return 2 * (abs(signed) - 1) + (1 if signed < 0 else 0)


def signed_of(code: int) -> int:
    i = code // 2 + 1
    return -i if code & 1 else i


class GroupSpec:
    """Common interface; concrete groups are frozen dataclasses."""

    def identity(self) -> Any:
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def length(self, a) -> int:
        raise NotImplementedError

    def letters(self) -> list:
        """Generators and inverses (distinct values) in alphabet order."""
        raise NotImplementedError

    def sort_key(self, a) -> tuple:
        raise NotImplementedError

    def sphere_size(self, n: int) -> int:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, a) -> str:
        raise NotImplementedError

    def contains(self, a) -> bool:
        raise NotImplementedError

    def ball_size(self, radius: int) -> int:
        return sum(self.sphere_size(n) for n in range(radius + 1))

    def element(self, word) -> "GroupElement":
        if isinstance(word, GroupElement):
            if word.group != self:
                raise StructuralError(f"element of {word.group} used in {self}")
            return word
        value = self.parse(word) if isinstance(word, str) else word
        if not self.contains(value):
            raise PreconditionError(f"{word!r} is not an element of {self}")
        return GroupElement(self, value)

    def value(self, word):
        """Raw value of a word literal, raw value or :class:`GroupElement`."""
        return self.element(word).value


@dataclass(frozen=True)
class FreeGroup(GroupSpec):
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_GENERATORS:
            raise PreconditionError(f"free group rank must be in [1, {MAX_GENERATORS}], got {self.k}")

    def __str__(self):
        return f"free:{self.k}"

    def identity(self):
        return ()

    def mul(self, a, b):
        j = 0
        na, nb = len(a), len(b)
        while j < na and j < nb and a[na - 1 - j] == -b[j]:
            j += 1
        return a[: na - j] + b[j:]

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def length(self, a):
        return len(a)

    def letters(self):
        return [(signed_of(c),) for c in range(2 * self.k)]

    def sort_key(self, a):
        return (len(a), tuple(code_of(x) for x in a))

    def sphere_size(self, n):
        if n == 0:
            return 1
        return 2 * self.k * (2 * self.k - 1) ** (n - 1)

    def contains(self, a):
        if not isinstance(a, tuple):
            return False
        for i, x in enumerate(a):
            if not isinstance(x, (int, np.integer)) or x == 0 or abs(x) > self.k:
                return False
            if i and a[i - 1] == -x:
                return False
        return True

    def reduce(self, letters: Iterable[int]) -> tuple:
        out: list[int] = []
        for x in letters:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(int(x))
        return tuple(out)

    def parse(self, text):
        text = text.strip()
        if text in ("", "1"):
            return ()
        letters = []
        for ch in text:
            if "a" <= ch <= "z":
                i = ord(ch) - ord("a") + 1
                s = i
            elif "A" <= ch <= "Z":
                i = ord(ch) - ord("A") + 1
                s = -i
            else:
                raise PreconditionError(f"bad letter {ch!r} in word {text!r}")
            if i > self.k:
                raise PreconditionError(f"letter {ch!r} exceeds rank {self.k}")
            letters.append(s)
        return self.reduce(letters)

    def format(self, a):
        return "".join(_letter_char(x) for x in a) if a else "1"

    def codes(self, a) -> tuple[int, ...]:
        return tuple(code_of(x) for x in a)

    def from_codes(self, codes: Iterable[int]) -> tuple:
        return tuple(signed_of(int(c)) for c in codes)


@dataclass(frozen=True)
class CyclicGroup(GroupSpec):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError(f"cyclic order must be >= 1, got {self.n}")

    def __str__(self):
        return f"cyclic:{self.n}"

    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.n

    def inv(self, a):
        return (-a) % self.n

    def length(self, a):
        return min(a, self.n - a)

    def letters(self):
        if self.n == 1:
            return []
        return [1] if self.n == 2 else [1, self.n - 1]

    def sort_key(self, a):
        if a <= self.n - a:
            return (a, (0,) * a)
        return (self.n - a, (1,) * (self.n - a))

    def sphere_size(self, m):
        if m == 0:
            return 1
        if 2 * m < self.n:
            return 2
        return 1 if 2 * m == self.n else 0

    def contains(self, a):
        return isinstance(a, (int, np.integer)) and 0 <= a < self.n

    def parse(self, text):
        text = text.strip()
        if text in ("", "1"):
            return 0
        if set(text) - {"a", "A"}:
            raise PreconditionError(f"cyclic words use only 'a' and 'A', got {text!r}")
        return (text.count("a") - text.count("A")) % self.n

    def format(self, a):
        if a == 0:
            return "1"
        return "a" * a if a <= self.n - a else "A" * (self.n - a)


@dataclass(frozen=True)
class ProductGroup(GroupSpec):
    factors: tuple[GroupSpec, ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise PreconditionError("a product needs at least two factors")
        if any(isinstance(f, ProductGroup) for f in self.factors):
            raise PreconditionError("nested products are not supported")

    def __str__(self):
        return "product:" + ",".join(str(f) for f in self.factors)

    def identity(self):
        return tuple(f.identity() for f in self.factors)

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def length(self, a):
        return sum(f.length(x) for f, x in zip(self.factors, a))

    def letters(self):
        ident = self.identity()
        out = []
        for i, f in enumerate(self.factors):
            for x in f.letters():
                out.append(ident[:i] + (x,) + ident[i + 1 :])
        return out

    def sort_key(self, a):
        return (self.length(a), tuple(f.sort_key(x) for f, x in zip(self.factors, a)))

    def sphere_size(self, n):
        # convolution of the factor sphere sizes
        counts = [1] + [0] * n
        for f in self.factors:
            sizes = [f.sphere_size(j) for j in range(n + 1)]
            counts = [sum(counts[i] * sizes[t - i] for i in range(t + 1)) for t in range(n + 1)]
        return counts[n]

    def contains(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == len(self.factors)
            and all(f.contains(x) for f, x in zip(self.factors, a))
        )

    def parse(self, text):
        text = text.strip()
        if text in ("", "1"):
            return self.identity()
        parts = text.split("|")
        if len(parts) != len(self.factors):
            raise PreconditionError(
                f"product word {text!r} needs {len(self.factors)} '|'-separated parts"
            )
        return tuple(f.parse(p) for f, p in zip(self.factors, parts))

    def format(self, a):
        return "|".join(f.format(x) for f, x in zip(self.factors, a))


def parse_group(text: str) -> GroupSpec:
    """Parse ``free:<k>``, ``cyclic:<n>`` or ``product:<spec>,<spec>``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    try:
        if kind == "free":
            return FreeGroup(int(rest))
        if kind == "cyclic":
            return CyclicGroup(int(rest))
    except ValueError as exc:
        raise PreconditionError(f"bad group spec {text!r}") from exc
    if kind == "product":
        # factor specs never contain commas themselves
        return ProductGroup(tuple(parse_group(part) for part in rest.split(",")))
    raise PreconditionError(f"unknown group kind in {text!r}")


@dataclass(frozen=True)
class GroupElement:
    group: GroupSpec
    value: Any

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        return invert(self)

    @property
    def length(self) -> int:
        return self.group.length(self.value)

    def __str__(self):
        return self.group.format(self.value)


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.group != b.group:
        raise StructuralError(f"cannot compose elements of {a.group} and {b.group}")
    return GroupElement(a.group, a.group.mul(a.value, b.value))


def invert(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, a.group.inv(a.value))


def length(a: GroupElement) -> int:
    return a.group.length(a.value)


class BallIndex:
    """Dense indexing of the Cayley ball ``{g : length(g) <= radius}``.

    Index 0 is the identity; elements are ordered by length, then
    lexicographically on words, so sphere ``n`` occupies the contiguous slice
    ``offsets[n]:offsets[n+1]`` and every smaller ball is a prefix.
    """

    group: GroupSpec
    radius: int
    offsets: np.ndarray
    lengths: np.ndarray

    @property
    def size(self) -> int:
        return int(self.offsets[-1])

    def __len__(self):
        return self.size

    def inner_size(self, radius: int) -> int:
        """Number of elements of length ``<= radius`` (a prefix of the index)."""
        if radius < 0:
            return 0
        return int(self.offsets[min(radius, self.radius) + 1])

    def index(self, value) -> int:
        raise NotImplementedError

    def value(self, i: int):
        raise NotImplementedError

    def values(self) -> list:
        return [self.value(i) for i in range(self.size)]

    def left_mul_map(self, value) -> np.ndarray:
        """``i -> index(value * element_i)``, with -1 where the product leaves the ball."""
        raise NotImplementedError


class FreeBall(BallIndex):
    """Ball in ``F_k`` indexed by closed-form mixed-radix arithmetic."""

    def __init__(self, group: FreeGroup, radius: int):
        self.group = group
        self.radius = radius
        k = group.k
        self.base = B = 2 * k - 1
        sizes = [group.sphere_size(n) for n in range(radius + 1)]
        self.offsets = np.zeros(radius + 2, dtype=np.int64)
        self.offsets[1:] = np.cumsum(sizes)
        N = self.size
        itype = np.int32 if N < 2**31 - 1 else np.int64
        self.lengths = np.repeat(np.arange(radius + 1), sizes).astype(np.int16)
        self.first = np.full(N, -1, dtype=np.int16)
        self.tail = np.full(N, -1, dtype=itype)
        for n in range(1, radius + 1):
            pos = np.arange(sizes[n], dtype=np.int64)
            sl = slice(int(self.offsets[n]), int(self.offsets[n + 1]))
            if n == 1:
                c1 = pos
                tail_pos = np.zeros_like(pos)
            else:
                bn1, bn2 = B ** (n - 1), B ** (n - 2)
                c1, rest = np.divmod(pos, bn1)
                r2 = rest // bn2
                tail_pos = rest + (r2 >= (c1 ^ 1)) * bn2
            self.first[sl] = c1
            self.tail[sl] = self.offsets[n - 1] + tail_pos
        self._pow = np.array([B**n for n in range(radius + 2)], dtype=np.int64)
        self._pow_m1 = np.concatenate([[0], self._pow[:-1]])
        self._letter_maps: dict[int, np.ndarray] = {}

    def index(self, value) -> int:
        n = len(value)
        if n > self.radius:
            return -1
        if n == 0:
            return 0
        B = self.base
        prev = code_of(value[0])
        pos = prev * B ** (n - 1)
        for i in range(1, n):
            c = code_of(value[i])
            pos += (c - (c > (prev ^ 1))) * B ** (n - 1 - i)
            prev = c
        return int(self.offsets[n]) + pos

    def value(self, i: int):
        out = []
        i = int(i)
        while i > 0:
            out.append(signed_of(int(self.first[i])))
            i = int(self.tail[i])
        return tuple(out)

    def letter_map(self, code: int) -> np.ndarray:
        cached = self._letter_maps.get(code)
        if cached is not None:
            return cached
        inv_c = code ^ 1
        n = self.lengths.astype(np.int64)
        res = np.full(self.size, -1, dtype=np.int64)
        cancel = self.first == inv_c
        res[cancel] = self.tail[cancel]
        grow = np.nonzero(~cancel & (n < self.radius))[0]
        nn = n[grow]
        pos = grow - self.offsets[nn]
        shift = code * self._pow[nn] - (self.first[grow] > inv_c) * self._pow_m1[nn]
        res[grow] = self.offsets[nn + 1] + shift + pos
        self._letter_maps[code] = res
        return res

    def left_mul_map(self, value) -> np.ndarray:
        idx = np.arange(self.size, dtype=np.int64)
        for x in reversed(value):
            m = self.letter_map(code_of(x))
            idx = np.where(idx >= 0, m[idx], -1)
        return idx


class GenericBall(BallIndex):
    """Ball built by breadth-first search with a dictionary index."""

    def __init__(self, group: GroupSpec, radius: int):
        self.group = group
        self.radius = radius
        letters = group.letters()
        levels = [[group.identity()]]
        seen = {group.identity()}
        for _ in range(radius):
            nxt = []
            for g in levels[-1]:
                for x in letters:
                    h = group.mul(g, x)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            levels.append(nxt)
        vals = sorted(seen, key=group.sort_key)
        self._values = vals
        self._index = {v: i for i, v in enumerate(vals)}
        self.lengths = np.array([group.length(v) for v in vals], dtype=np.int16)
        counts = np.bincount(self.lengths, minlength=radius + 1)
        self.offsets = np.zeros(radius + 2, dtype=np.int64)
        self.offsets[1:] = np.cumsum(counts)

    def index(self, value) -> int:
        return self._index.get(value, -1)

    def value(self, i: int):
        return self._values[int(i)]

    def values(self):
        return list(self._values)

    def left_mul_map(self, value) -> np.ndarray:
        mul, get = self.group.mul, self._index.get
        return np.array([get(mul(value, v), -1) for v in self._values], dtype=np.int64)


def enumerate_ball(group: GroupSpec, radius: int, cap: int | None = None) -> BallIndex:
    if radius < 0:
        raise PreconditionError(f"radius must be >= 0, got {radius}")
    cap = memory_cap(cap)
    required = group.ball_size(radius)
    if required > cap:
        raise ResourceError(
            f"ball of radius {radius} in {group} needs {required} elements (cap {cap})",
            required=required,
            cap=cap,
        )
    if isinstance(group, FreeGroup):
        return FreeBall(group, radius)
    return GenericBall(group, radius)


def words(group: GroupSpec, values: Sequence) -> list[str]:
    return [group.format(v) for v in values]
