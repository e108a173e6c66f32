"""Instance data model for the four hiring models, plus generators and I/O.

Models: interview-then-hire with a top-k selection (``ptk``), sequential
offering (``seq``), parallel offering with heterogeneous positions (``par``),
and one-shot simultaneous offering with a linear overflow penalty (``sim``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InstanceError

PROB_TOL = 1e-9


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise InstanceError(msg)


@dataclass(frozen=True)
class FiniteDistribution:
    """Finitely supported value distribution in canonical form.

    Canonical means: support strictly increasing, exact-duplicate values
    merged, zero-probability atoms dropped.
    """

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        _check(len(self.support) == len(self.probs), "support/probs length mismatch")
        _check(len(self.support) > 0, "empty distribution")
        _check(all(r >= 0 for r in self.support), "negative support value")
        _check(all(-PROB_TOL <= q <= 1 + PROB_TOL for q in self.probs), "probability outside [0, 1]")
        _check(abs(sum(self.probs) - 1.0) <= PROB_TOL, "probabilities do not sum to 1")
        _check(all(a < b for a, b in zip(self.support, self.support[1:])), "support not strictly increasing")

    @classmethod
    def make(cls, support: Iterable[float], probs: Iterable[float]) -> "FiniteDistribution":
        """Build the canonical form: sort, merge duplicates, drop zero atoms."""
        pairs: dict[float, float] = {}
        support = list(support)
        probs = list(probs)
        _check(len(support) == len(probs), "support/probs length mismatch")
        for r, q in zip(support, probs):
            pairs[float(r)] = pairs.get(float(r), 0.0) + float(q)
        items = sorted((r, q) for r, q in pairs.items() if q > 0.0)
        _check(len(items) > 0, "distribution has no positive-probability atoms")
        return cls(tuple(r for r, _ in items), tuple(q for _, q in items))

    @classmethod
    def point(cls, value: float) -> "FiniteDistribution":
        return cls.make([value], [1.0])

    @classmethod
    def bernoulli_value(cls, value: float, p: float) -> "FiniteDistribution":
        """Value ``value`` with probability p, else 0."""
        if value == 0.0:
            return cls.point(0.0)
        return cls.make([0.0, value], [1.0 - p, p])

    def mean(self) -> float:
        return float(sum(r * q for r, q in zip(self.support, self.probs)))

    def as_bernoulli(self) -> tuple[float, float] | None:
        """Return (value, prob) if this is a weighted Bernoulli, else None.

        Point masses count: {v} is (v, 1) for v > 0 and {0} is (0, 0).
        """
        if len(self.support) == 1:
            r = self.support[0]
            return (r, 1.0) if r > 0 else (0.0, 0.0)
        if len(self.support) == 2 and self.support[0] == 0.0:
            return (self.support[1], self.probs[1])
        return None


@dataclass(frozen=True)
class ProbeTopKInstance:
    """Interview up to T of n candidates, then hire the best k interviewed."""

    k: int
    T: int
    n: int
    distributions: tuple[FiniteDistribution, ...]

    def __post_init__(self):
        _check(1 <= self.k <= self.T <= self.n, "need 1 <= k <= T <= n")
        _check(len(self.distributions) == self.n, "need one distribution per candidate")

    def global_support(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted union support r (length J) and the n-by-J probability matrix.

        Cached and shared between calls; the arrays are read-only.
        """
        values, q, _ = _global_support_of(self.distributions)
        return values, q

    def support_index(self) -> dict[float, int]:
        """Map from support value to its column in the global support."""
        return _global_support_of(self.distributions)[2]


@lru_cache(maxsize=512)
def _global_support_of(dists: tuple):
    values = sorted({r for d in dists for r in d.support})
    index = {r: j for j, r in enumerate(values)}
    q = np.zeros((len(dists), len(values)))
    for i, d in enumerate(dists):
        for r, p in zip(d.support, d.probs):
            q[i, index[r]] = p
    values = np.asarray(values, dtype=float)
    values.flags.writeable = False
    q.flags.writeable = False
    return values, q, index


@dataclass(frozen=True)
class SeqInstance:
    """Sequential offering: up to T offers, up to k binding acceptances."""

    k: int
    T: int
    n: int
    p: tuple[float, ...]
    v: tuple[float, ...]

    def __post_init__(self):
        _check(1 <= self.k <= self.T <= self.n, "need 1 <= k <= T <= n")
        _check(len(self.p) == self.n and len(self.v) == self.n, "p and v must have length n")
        _check(all(-PROB_TOL <= x <= 1 + PROB_TOL for x in self.p), "acceptance probability outside [0, 1]")
        _check(all(x >= 0 for x in self.v), "negative value")


@dataclass(frozen=True)
class ParInstance:
    """Parallel offering: k heterogeneous positions, T offering rounds."""

    k: int
    T: int
    n: int
    p: tuple[tuple[float, ...], ...]
    v: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        _check(1 <= self.k <= self.T <= self.n, "need 1 <= k <= T <= n")
        for mat, name in ((self.p, "p"), (self.v, "v")):
            _check(len(mat) == self.n and all(len(row) == self.k for row in mat),
                   f"{name} must be an n-by-k matrix")
        _check(all(-PROB_TOL <= x <= 1 + PROB_TOL for row in self.p for x in row),
               "acceptance probability outside [0, 1]")
        _check(all(x >= 0 for row in self.v for x in row), "negative value")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.p, dtype=float), np.asarray(self.v, dtype=float)

    def identical_positions(self) -> bool:
        p, v = self.arrays()
        return bool(np.all(p == p[:, :1]) and np.all(v == v[:, :1]))


@dataclass(frozen=True)
class SimInstance:
    """Simultaneous offering with unit over-capacity penalty.

    Values are stored already divided by the penalty c, so the reward of an
    accepted set A is sum(v_i, i in A) - max(|A| - k, 0).
    """

    k: int
    n: int
    p: tuple[float, ...]
    v: tuple[float, ...]

    def __post_init__(self):
        _check(1 <= self.k <= self.n, "need 1 <= k <= n")
        _check(len(self.p) == self.n and len(self.v) == self.n, "p and v must have length n")
        _check(all(-PROB_TOL <= x <= 1 + PROB_TOL for x in self.p), "acceptance probability outside [0, 1]")
        _check(all(x >= 0 for x in self.v), "negative value")

    @classmethod
    def from_raw(cls, k: int, p: Sequence[float], v: Sequence[float], cost: float) -> "SimInstance":
        """Construct from unscaled values and an explicit penalty cost c > 0."""
        _check(cost > 0, "penalty cost must be positive")
        return cls(k=k, n=len(p), p=tuple(float(x) for x in p),
                   v=tuple(float(x) / cost for x in v))


# ---------------------------------------------------------------------------
# Generators


def sample_candidate_pool(n: int, mode: str, seed: int) -> list[tuple[float, float]]:
    """Sample n (value, acceptance probability) pairs.

    Values are Uniform(0,1). In ``negative_correlation`` mode p is drawn
    Beta(10(1-v), 10v) via two Gamma draws, with the degenerate conventions
    Beta(a, 0) = 1 and Beta(0, b) = 0; in ``independent`` mode p is
    Uniform(0,1). Deterministic given the seed.
    """
    if n < 1:
        raise InstanceError("need n >= 1")
    if mode not in ("negative_correlation", "independent"):
        raise InstanceError(f"unknown sampling mode {mode!r}")
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.0, 1.0, size=n)
    if mode == "independent":
        p = rng.uniform(0.0, 1.0, size=n)
    else:
        ga = rng.gamma(np.maximum(10.0 * (1.0 - v), 0.0), 1.0)
        gb = rng.gamma(np.maximum(10.0 * v, 0.0), 1.0)
        total = ga + gb
        # total == 0 cannot happen: the two shapes sum to 10
        p = np.where(total > 0, ga / np.where(total > 0, total, 1.0), 0.0)
    return [(float(vi), float(pi)) for vi, pi in zip(v, p)]


def tightness_probetopk(n: int, k: int) -> ProbeTopKInstance:
    """n identical candidates worth 1 with probability k/n, budget T = n."""
    if not 1 <= k <= n:
        raise InstanceError("need 1 <= k <= n")
    dist = FiniteDistribution.bernoulli_value(1.0, k / n)
    return ProbeTopKInstance(k=k, T=n, n=n, distributions=(dist,) * n)


def tightness_parallel(k: int, T: int) -> ParInstance:
    """k identical positions, kT identical candidates with v=1, p=1/T."""
    if k < 1 or T < 1:
        raise InstanceError("need k, T >= 1")
    n = k * T
    row_p = (1.0 / T,) * k
    row_v = (1.0,) * k
    return ParInstance(k=k, T=T, n=n, p=(row_p,) * n, v=(row_v,) * n)


def counterexample_value_ordered(eps: float) -> SimInstance:
    """Two-candidate instance where the best value-ordered prefix is poor."""
    if not 0 < eps < 0.5:
        raise InstanceError("need 0 < eps < 1/2")
    return SimInstance(k=1, n=2, p=(eps, 1.0), v=(eps, eps * (1.0 - eps)))


def counterexample_ev_ordered(n: int) -> SimInstance:
    """Instance where ordering by v*p forfeits almost all value.

    Candidate 1 has v=1/n, p=1; candidates 2..n+1 have v=1-1/n, p=1/n.
    """
    if n < 2:
        raise InstanceError("need n >= 2")
    p = (1.0,) + (1.0 / n,) * n
    v = (1.0 / n,) + (1.0 - 1.0 / n,) * n
    return SimInstance(k=1, n=n + 1, p=p, v=v)


@lru_cache(maxsize=512)
def _bernoulli_dists(v: tuple, p: tuple) -> tuple:
    return tuple(FiniteDistribution.bernoulli_value(vi, pi) for vi, pi in zip(v, p))


def seq_to_ptk(instance: SeqInstance) -> ProbeTopKInstance:
    """Embed a sequential-offering instance as weighted Bernoulli values."""
    return ProbeTopKInstance(k=instance.k, T=instance.T, n=instance.n,
                             distributions=_bernoulli_dists(instance.v, instance.p))


# ---------------------------------------------------------------------------
# Serialization (JSON, one instance per file)


def _instance_to_dict(instance) -> dict:
    if isinstance(instance, ProbeTopKInstance):
        return {
            "model": "ptk", "k": instance.k, "T": instance.T, "n": instance.n,
            "distributions": [
                {"support": list(d.support), "probs": list(d.probs)}
                for d in instance.distributions
            ],
        }
    if isinstance(instance, SeqInstance):
        return {"model": "seq", "k": instance.k, "T": instance.T, "n": instance.n,
                "p": list(instance.p), "v": list(instance.v)}
    if isinstance(instance, ParInstance):
        return {"model": "par", "k": instance.k, "T": instance.T, "n": instance.n,
                "p": [list(r) for r in instance.p], "v": [list(r) for r in instance.v]}
    if isinstance(instance, SimInstance):
        return {"model": "sim", "k": instance.k, "n": instance.n,
                "p": list(instance.p), "v": list(instance.v), "cost": 1.0}
    raise InstanceError(f"not an instance: {type(instance)!r}")


def save_instance(instance, path) -> None:
    Path(path).write_text(json.dumps(_instance_to_dict(instance), indent=1))


def load_instance(path):
    """Load any model's instance; the ``model`` tag selects the type."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance file: {exc}") from exc
    if not isinstance(data, dict) or "model" not in data:
        raise InstanceError("instance file must be a JSON object with a 'model' tag")
    model = data["model"]
    try:
        if model == "ptk":
            dists = tuple(FiniteDistribution.make(d["support"], d["probs"])
                          for d in data["distributions"])
            return ProbeTopKInstance(k=data["k"], T=data["T"], n=data["n"], distributions=dists)
        if model == "seq":
            return SeqInstance(k=data["k"], T=data["T"], n=data["n"],
                               p=tuple(data["p"]), v=tuple(data["v"]))
        if model == "par":
            return ParInstance(k=data["k"], T=data["T"], n=data["n"],
                               p=tuple(tuple(r) for r in data["p"]),
                               v=tuple(tuple(r) for r in data["v"]))
        if model == "sim":
            return SimInstance.from_raw(k=data["k"], p=data["p"], v=data["v"],
                                        cost=data.get("cost", 1.0))
    except KeyError as exc:
        raise InstanceError(f"missing field {exc} for model {model!r}") from exc
    raise InstanceError(f"unknown model tag {model!r}")
