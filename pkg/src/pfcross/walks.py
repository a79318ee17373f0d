"""Finitely supported probability measures: convolution powers, entropy and speed."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import PreconditionError, ResourceError, StructuralError
from .group import BallIndex, FreeGroup, GroupSpec, enumerate_ball, memory_cap

MASS_TOL = 1e-12


class Measure:
    """Probability masses on finitely many group elements, keyed by value."""

    __slots__ = ("group", "masses")

    def __init__(self, group: GroupSpec, masses: Mapping[Any, float]):
        clean = {}
        for v in sorted(masses, key=group.sort_key):
            if not group.contains(v):
                raise PreconditionError(f"{v!r} is not an element of {group}")
            m = float(masses[v])
            if m < 0 or not math.isfinite(m):
                raise PreconditionError(f"masses must be finite and nonnegative, got {m} at {group.format(v)}")
            if m > 0:
                clean[v] = m
        if not clean:
            raise PreconditionError("measure has empty support")
        total = math.fsum(clean.values())
        if abs(total - 1.0) > MASS_TOL:
            raise PreconditionError(f"masses sum to {total!r}, not 1")
        self.group = group
        self.masses = clean

    @classmethod
    def from_terms(cls, group: GroupSpec, terms: Iterable[tuple[Any, float]]) -> "Measure":
        acc: dict = {}
        for word, m in terms:
            v = group.value(word)
            acc[v] = acc.get(v, 0.0) + float(m)
        return cls(group, acc)

    def __eq__(self, other):
        return isinstance(other, Measure) and self.group == other.group and self.masses == other.masses

    def __repr__(self):
        body = ", ".join(f"{self.group.format(v)}: {m!r}" for v, m in self.masses.items())
        return f"Measure({self.group}, {{{body}}})"

    @property
    def support(self) -> list:
        return list(self.masses)

    @property
    def radius(self) -> int:
        return max(self.group.length(v) for v in self.masses)

    def mass(self, word) -> float:
        return self.masses.get(self.group.value(word), 0.0)

    @property
    def identity_mass(self) -> float:
        return self.masses.get(self.group.identity(), 0.0)

    @property
    def is_nearest_neighbor(self) -> bool:
        return isinstance(self.group, FreeGroup) and self.radius <= 1

    @property
    def is_radial(self) -> bool:
        """Nearest-neighbour on a free group with equal mass on every letter."""
        if not self.is_nearest_neighbor:
            return False
        ms = [self.masses.get(x, 0.0) for x in self.group.letters()]
        return max(ms) - min(ms) <= MASS_TOL and ms[0] > 0

    @property
    def is_degenerate(self) -> bool:
        """Whether the support visibly fails to generate the group as a semigroup.

        Exact for nearest-neighbour measures on free groups (every letter must
        carry mass); otherwise flags supports that miss a generator direction
        or sit in a single cyclic subgroup.
        """
        G = self.group
        nontrivial = [v for v in self.masses if v != G.identity()]
        if not nontrivial:
            return True
        if isinstance(G, FreeGroup):
            if self.is_nearest_neighbor:
                return any(x not in self.masses for x in G.letters())
            touched = {abs(x) for v in nontrivial for x in v}
            if len(touched) < G.k:
                return True
            return len(nontrivial) == 1
        return False

    def reflect(self) -> "Measure":
        G = self.group
        return Measure(G, {G.inv(v): m for v, m in self.masses.items()})

    def to_json(self) -> dict:
        G = self.group
        return {"group": str(G), "terms": [{"word": G.format(v), "mass": m} for v, m in self.masses.items()]}


def srw_measure(group: GroupSpec) -> Measure:
    letters = group.letters()
    acc: dict = {}
    for x in letters:
        acc[x] = acc.get(x, 0.0) + 1.0 / len(letters)
    return Measure(group, acc)


def lazy_measure(group: GroupSpec, q: float) -> Measure:
    """Mass ``q`` at the identity and ``1 - q`` spread as the simple random walk."""
    if not 0.0 <= q < 1.0:
        raise PreconditionError(f"laziness must lie in [0, 1), got {q}")
    srw = srw_measure(group)
    acc = {v: (1.0 - q) * m for v, m in srw.masses.items()}
    if q > 0:
        acc[group.identity()] = acc.get(group.identity(), 0.0) + q
    return Measure(group, acc)


def parse_measure(spec: str | Mapping, group: GroupSpec) -> Measure:
    """``srw``, ``lazy:<q>``, a JSON file path, or an already-parsed JSON object."""
    if isinstance(spec, str):
        s = spec.strip()
        if s == "srw":
            return srw_measure(group)
        if s.startswith("lazy:"):
            try:
                q = float(s[5:])
            except ValueError as exc:
                raise PreconditionError(f"bad laziness in {s!r}") from exc
            return lazy_measure(group, q)
        try:
            with open(s) as fh:
                obj = json.load(fh)
        except FileNotFoundError as exc:
            raise PreconditionError(f"measure file not found: {s}") from exc
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"measure file {s} is not valid JSON: {exc}") from exc
    else:
        obj = spec
    if not isinstance(obj, Mapping) or "terms" not in obj:
        raise PreconditionError('measure JSON needs a "terms" list of {"word", "mass"}')
    if "group" in obj and str(obj["group"]) != str(group):
        raise StructuralError(f"measure is for {obj['group']}, requested group is {group}")
    try:
        terms = [(t["word"], t["mass"]) for t in obj["terms"]]
    except (KeyError, TypeError) as exc:
        raise PreconditionError('each measure term needs "word" and "mass"') from exc
    return Measure.from_terms(group, terms)


def convolve_measure(mu: Measure, nu: Measure) -> Measure:
    """``(mu * nu)(t) = sum_s mu(s) nu(s^-1 t)``."""
    if mu.group != nu.group:
        raise StructuralError(f"measures on {mu.group} and {nu.group}")
    G = mu.group
    acc: dict = {}
    for s, a in mu.masses.items():
        for u, b in nu.masses.items():
            t = G.mul(s, u)
            acc[t] = acc.get(t, 0.0) + a * b
    return Measure(G, acc)


def measure_power(mu: Measure, n: int) -> Measure:
    if n < 0:
        raise PreconditionError("power must be >= 0")
    out = Measure(mu.group, {mu.group.identity(): 1.0})
    for _ in range(n):
        out = convolve_measure(out, mu)
    return out


def shannon(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return -math.fsum(p * np.log(p))


class PowerSequence:
    """Exact ``mu^{*n}`` as dense vectors over one ball, advanced in place.

    Step ``n -> n+1`` computes ``new[t] = sum_s mu(s) old[s^-1 t]`` with the
    precomputed maps ``t -> s^-1 t``; the ball has radius ``radius(mu) * n_max``
    so no mass is ever lost.
    """

    def __init__(self, mu: Measure, n_max: int, cap: int | None = None):
        self.mu = mu
        self.ball: BallIndex = enumerate_ball(mu.group, mu.radius * n_max, cap)
        G = mu.group
        self._maps = [(m, self.ball.left_mul_map(G.inv(s))) for s, m in mu.masses.items()]
        self.n = 0
        self.dist = np.zeros(self.ball.size)
        self.dist[0] = 1.0

    def step(self) -> np.ndarray:
        new = np.zeros_like(self.dist)
        for m, idx in self._maps:
            ok = idx >= 0
            new[ok] += m * self.dist[idx[ok]]
        self.dist = new
        self.n += 1
        return new

    def mean_length(self) -> float:
        return float(np.dot(self.dist, self.ball.lengths))


def exact_horizon(mu: Measure, n_max: int, cap: int | None = None) -> int:
    """Largest ``n <= n_max`` whose covering ball fits under the element cap."""
    cap = memory_cap(cap)
    n = n_max
    while n > 0 and mu.group.ball_size(mu.radius * n) > cap:
        n -= 1
    return n


def fit_entropy_rate(ns, Hs) -> float:
    """Rate ``h`` from the exact solve of ``H_n = h n + b log n + c + d/n`` on the last four points."""
    ns = np.asarray(ns[-4:], dtype=float)
    Hs = np.asarray(Hs[-4:], dtype=float)
    if len(ns) < 4:
        return float(Hs[-1] / ns[-1])
    A = np.column_stack([ns, np.log(ns), np.ones_like(ns), 1.0 / ns])
    return float(np.linalg.solve(A, Hs)[0])


def aitken(seq) -> float | None:
    """Aitken delta-squared on the last three terms, or None when undefined."""
    if len(seq) < 3:
        return None
    a, b, c = (float(x) for x in seq[-3:])
    den = c - 2 * b + a
    if den == 0:
        return c
    return c - (c - b) ** 2 / den


def _mc_entropies(mu: Measure, ns: list[int], samples: int, seed: int) -> list[tuple[int, float]]:
    """Plug-in entropy of the empirical law of ``samples`` trajectories (biased low)."""
    G = mu.group
    vals = list(mu.masses)
    probs = np.array([mu.masses[v] for v in vals])
    rng = np.random.default_rng(seed)
    steps = rng.choice(len(vals), size=(samples, max(ns)), p=probs)
    pos = [G.identity()] * samples
    out = []
    want = set(ns)
    for t in range(max(ns)):
        col = steps[:, t]
        pos = [G.mul(g, vals[j]) for g, j in zip(pos, col)]
        if t + 1 in want:
            _, counts = np.unique(np.array([hash(g) for g in pos]), return_counts=True)
            out.append((t + 1, shannon(counts / samples)))
    return out


@dataclass
class EntropyReport:
    h_sequence: list[tuple[int, float, float]]
    h_extrapolated: float
    h_aitken: float | None
    fekete_upper: float
    speed_sequence: list[tuple[int, float]]
    speed_aitken: float | None
    diagnostics: dict
    mc_sequence: list[tuple[int, float, float]] = field(default_factory=list)
    furstenberg: float | None = None

    def to_dict(self, bits: bool = False) -> dict:
        u = 1.0 / math.log(2) if bits else 1.0
        return {
            "unit": "bits" if bits else "nats",
            "h_sequence": [{"n": n, "H": H * u, "H_over_n": r * u} for n, H, r in self.h_sequence],
            "h_extrapolated": self.h_extrapolated * u,
            "h_aitken": None if self.h_aitken is None else self.h_aitken * u,
            "fekete_upper": self.fekete_upper * u,
            "speed_sequence": [{"n": n, "mean_length_over_n": v} for n, v in self.speed_sequence],
            "speed_aitken": self.speed_aitken,
            "mc_sequence": [
                {"n": n, "H": H * u, "H_over_n": r * u, "biased_low": True} for n, H, r in self.mc_sequence
            ],
            "furstenberg": None if self.furstenberg is None else self.furstenberg * u,
            "diagnostics": self.diagnostics,
        }


def avez_entropy(
    mu: Measure, n_max: int, mc_samples: int = 0, seed: int = 0, cap: int | None = None
) -> EntropyReport:
    """Exact ``H(mu^{*n})`` while the covering ball fits, Monte Carlo beyond.

    ``h_extrapolated`` comes from an asymptotic fit over the last four exact
    values and is capped by the last exact ``H_n/n``, which bounds ``h`` from
    above by subadditivity.
    """
    if n_max < 2:
        raise PreconditionError("n_max must be >= 2")
    if mu.is_degenerate:
        raise PreconditionError("measure support does not generate the group as a semigroup")
    n_exact = exact_horizon(mu, n_max, cap)
    if n_exact < 1:
        raise ResourceError("not even one convolution power fits under the element cap", cap=memory_cap(cap))
    seq = PowerSequence(mu, n_exact, cap)
    H, speed = [], []
    for n in range(1, n_exact + 1):
        d = seq.step()
        H.append(shannon(d))
        speed.append((n, seq.mean_length() / n))
    ns = list(range(1, n_exact + 1))
    ratios = [h / n for h, n in zip(H, ns)]
    mono = max((ratios[i + 1] - ratios[i] for i in range(len(ratios) - 1)), default=0.0)
    sub = max(
        (H[a + b - 1] - H[a - 1] - H[b - 1] for a in ns for b in ns if a + b <= n_exact),
        default=-math.inf,
    )
    fekete = ratios[-1]
    fit = fit_entropy_rate(ns, H)
    capped = fit > fekete
    h_est = min(fit, fekete)
    mc = []
    if mc_samples > 0 and n_exact < n_max:
        for n, Hn in _mc_entropies(mu, list(range(n_exact + 1, n_max + 1)), mc_samples, seed):
            mc.append((n, Hn, Hn / n))
    diagnostics = {
        "n_exact": n_exact,
        "support_size": int(np.count_nonzero(seq.dist)),
        "max_ratio_increase": mono,
        "ratios_nonincreasing": bool(mono <= 1e-9),
        "max_subadditivity_defect": sub if math.isfinite(sub) else None,
        "subadditive": bool(sub <= 1e-9),
        "extrapolation": "fit H_n = h n + b log n + c + d/n on the last four exact values",
        "fit_capped_by_fekete": capped,
    }
    return EntropyReport(
        h_sequence=[(n, h, r) for n, h, r in zip(ns, H, ratios)],
        h_extrapolated=h_est,
        h_aitken=aitken(ratios),
        fekete_upper=fekete,
        speed_sequence=speed,
        speed_aitken=aitken([v for _, v in speed]),
        diagnostics=diagnostics,
        mc_sequence=mc,
    )


@dataclass
class SpeedReport:
    sequence: np.ndarray  # mean length / n for n = 1..n_max
    method: str
    extrapolated: float
    aitken: float | None
    closed_form: float | None

    @property
    def last(self) -> float:
        return float(self.sequence[-1])

    def to_dict(self, every: int = 1) -> dict:
        n = len(self.sequence)
        keep = sorted(set(range(0, n, max(every, 1))) | {n - 1})
        return {
            "method": self.method,
            "n_max": n,
            "speed": self.last,
            "extrapolated": self.extrapolated,
            "aitken": self.aitken,
            "closed_form": self.closed_form,
            "sequence": [{"n": i + 1, "mean_length_over_n": float(self.sequence[i])} for i in keep],
        }


def radial_speed_closed_form(mu: Measure) -> float:
    k = mu.group.k
    return (1.0 - mu.identity_mass) * (k - 1) / k


def birth_death_lengths(mu: Measure, n_max: int) -> np.ndarray:
    """Mean word length after ``n = 1..n_max`` steps of a radial walk, via its length chain."""
    if not mu.is_radial:
        raise PreconditionError("the length-chain reduction needs a radial nearest-neighbour measure")
    k = mu.group.k
    stay = mu.identity_mass
    move = 1.0 - stay
    up, down = move * (2 * k - 1) / (2 * k), move / (2 * k)
    dist = np.zeros(n_max + 2)
    dist[0] = 1.0
    lengths = np.arange(n_max + 2, dtype=float)
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        new = stay * dist
        new[1] += move * dist[0]
        new[2:] += up * dist[1:-1]
        new[0:-2] += down * dist[1:-1]
        dist = new
        out[n - 1] = float(np.dot(dist, lengths))
    return out


def speed(mu: Measure, n_max: int = 2000, cap: int | None = None) -> SpeedReport:
    """Sequence ``E[L(X_n)]/n``: exact length chain for radial walks, exact powers otherwise."""
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    if mu.is_degenerate:
        raise PreconditionError("measure support does not generate the group as a semigroup")
    if mu.is_radial:
        means = birth_death_lengths(mu, n_max)
        seq = means / np.arange(1, n_max + 1)
        closed = radial_speed_closed_form(mu)
        return SpeedReport(seq, "length-chain", float(seq[-1]), aitken(seq), closed)
    n_exact = exact_horizon(mu, n_max, cap)
    if n_exact < 1:
        raise ResourceError("not even one convolution power fits under the element cap", cap=memory_cap(cap))
    ps = PowerSequence(mu, n_exact, cap)
    seq = []
    for n in range(1, n_exact + 1):
        ps.step()
        seq.append(ps.mean_length() / n)
    seq = np.array(seq)
    means = seq * np.arange(1, n_exact + 1)
    # L_n = l n + c + o(1): the two-step increment drops c and averages out parity
    extrapolated = float((means[-1] - means[-3]) / 2.0) if n_exact >= 3 else float(seq[-1])
    return SpeedReport(seq, "exact-powers", extrapolated, aitken(seq), None)
