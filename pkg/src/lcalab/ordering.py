"""Seeded k-wise independent rankings and level-sequence combinatorics.

A ranking assigns each id a level in ``1..L`` through a random polynomial of
degree ``k-1`` over a prime field, range-reduced by ``mod L``. The rank of
``v`` is the pair ``(level(v), v)``; comparing ranks lexicographically gives
the vertex ordering every LCA session shares.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import mpmath
import numpy as np
from sympy import nextprime

from .errors import ParameterError

# Range reduction bias is at most L/p per value; p >= n*L*2**10 keeps it negligible.
FIELD_SLACK_BITS = 10
_INT64_SAFE_P = 2**31


@dataclass(frozen=True, order=True)
class Rank:
    level: int
    id: int


def _seed_bytes(seed: int | str | bytes) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, str):
        s = seed[2:] if seed.lower().startswith("0x") else seed
        if not s:
            return b""
        try:
            value = int(s, 16)
        except ValueError:
            raise ParameterError(f"seed must be hex, got {seed!r}") from None
        seed = value
    if isinstance(seed, int) and seed >= 0:
        return seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    raise ParameterError(f"unsupported seed {seed!r}")


def default_modulus(n: int, L: int) -> int:
    return int(nextprime(max(n * L << FIELD_SLACK_BITS, 2) - 1))


def _derive_coefficients(seed: bytes, k: int, p: int) -> tuple[int, ...]:
    width = (p.bit_length() + 7) // 8 + 8
    stream = hashlib.shake_256(b"lcalab/ranking/v1:" + seed).digest(k * width)
    return tuple(
        int.from_bytes(stream[i * width:(i + 1) * width], "big") % p for i in range(k)
    )


class RankingFunction:
    """Member ``h: [n] -> [L]`` of the polynomial hash family.

    ``level`` evaluates lazily and memoizes; :meth:`precompute` fills the
    whole table at once with vectorized Horner evaluation. Both paths give
    identical values.
    """

    def __init__(self, n: int, L: int, k: int, p: int, coeffs: Sequence[int], seed: bytes = b""):
        if n < 1 or not 1 <= L or not 1 <= k:
            raise ParameterError(f"need n >= 1, L >= 1, k >= 1; got n={n}, L={L}, k={k}")
        if len(coeffs) != k:
            raise ParameterError(f"need {k} coefficients, got {len(coeffs)}")
        if p < max(n, L):
            raise ParameterError(f"field modulus {p} smaller than max(n, L)")
        self.n = n
        self.L = L
        self.k = k
        self.p = p
        self.coeffs = tuple(int(c) % p for c in coeffs)
        self.seed = seed
        self._memo: dict[int, int] = {}
        self._table: list[int] | None = None

    @classmethod
    def from_coefficients(cls, n: int, L: int, coeffs: Sequence[int], p: int) -> "RankingFunction":
        return cls(n, L, len(coeffs), p, coeffs)

    @property
    def seed_hex(self) -> str:
        return self.seed.hex()

    @property
    def seed_bits(self) -> int:
        """Bits needed to describe the function: ``k * ceil(log2 p)``."""
        return self.k * math.ceil(math.log2(self.p))

    def _poly(self, x: int) -> int:
        p = self.p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def level(self, v: int) -> int:
        if self._table is not None and 0 <= v < self.n:
            return self._table[v]
        if not 0 <= v < self.n:
            raise ParameterError(f"id {v} out of range 0..{self.n - 1}")
        lv = self._memo.get(v)
        if lv is None:
            lv = self._memo[v] = 1 + self._poly(v) % self.L
        return lv

    def levels(self) -> np.ndarray:
        """Levels of all ids ``0..n-1`` as an int64 array."""
        if self._table is not None:
            return np.asarray(self._table, dtype=np.int64)
        if self.p < _INT64_SAFE_P:
            x = np.arange(self.n, dtype=np.int64)
            acc = np.zeros(self.n, dtype=np.int64)
            for c in reversed(self.coeffs):
                acc = (acc * x + c) % self.p
        else:
            acc = np.array([self._poly(v) for v in range(self.n)], dtype=object)
        return (1 + acc % self.L).astype(np.int64)

    def precompute(self) -> "RankingFunction":
        if self._table is None:
            self._table = self.levels().tolist()
        return self

    def rank(self, v: int) -> Rank:
        return Rank(self.level(v), v)

    def precedes(self, u: int, v: int) -> bool:
        return (self.level(u), u) < (self.level(v), v)

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "L": self.L, "k": self.k, "seed_hex": self.seed_hex, "p": self.p},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RankingFunction":
        obj = json.loads(text)
        return sample_ranking(obj["n"], obj["L"], obj["k"], bytes.fromhex(obj["seed_hex"]), p=obj["p"])

    def __repr__(self) -> str:
        return f"RankingFunction(n={self.n}, L={self.L}, k={self.k}, p={self.p}, seed=0x{self.seed_hex})"


def sample_ranking(
    n: int, L: int, k: int, seed: int | str | bytes, *, p: int | None = None
) -> RankingFunction:
    """Deterministically derive a ranking from ``seed`` (int, hex string or bytes)."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if not 1 <= L <= n:
        raise ParameterError(f"need 1 <= L <= n, got L={L}, n={n}")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if p is None:
        p = default_modulus(n, L)
    raw = _seed_bytes(seed)
    return RankingFunction(n, L, k, p, _derive_coefficients(raw, k, p), raw)


def precedes(rf: RankingFunction, u: int, v: int) -> bool:
    return rf.precedes(u, v)


def _next_pow2(x: int) -> int:
    return 1 if x <= 1 else 1 << (x - 1).bit_length()


def default_parameters(n: int, d: float, c: float = 1.0) -> tuple[int, int]:
    """Default ``(L, k)``: L = 4*ceil(d) rounded up to a power of two, k = ceil(6*d*c*log2 n).

    Both are clamped into ``[1, n]``.
    """
    L = _next_pow2(4 * math.ceil(d))
    k = math.ceil(6 * d * c * math.log2(max(n, 2)))
    return max(1, min(L, n)), max(1, min(k, n))


# -- level-sequence combinatorics -----------------------------------------

def count_legal_sequences(L: int, t: int) -> int:
    """Number of non-decreasing sequences of length ``t`` over ``{1..L}``."""
    if L < 1 or t < 0:
        raise ParameterError("need L >= 1 and t >= 0")
    return math.comb(t + L - 1, t)


def stars_and_bars_count(L: int, t: int) -> int:
    """``C(t+L, t)``: the count obtained when the first level may also be 0."""
    if L < 1 or t < 0:
        raise ParameterError("need L >= 1 and t >= 0")
    return math.comb(t + L, t)


def enumerate_legal_sequences(L: int, t: int) -> int:
    """Brute-force count of non-decreasing sequences (for cross-checks)."""
    return sum(all(a <= b for a, b in zip(s, s[1:])) for s in product(range(1, L + 1), repeat=t))


def legal_path_probability(L: int, t: int) -> Fraction:
    """Probability that ``t`` independent uniform levels come out non-decreasing."""
    if t < 1:
        raise ParameterError("need t >= 1")
    return Fraction(count_legal_sequences(L, t), L**t)


def legal_path_bound(L: int, t: int, dps: int = 60) -> mpmath.mpf:
    """``(e(t+L)/(L t))^t`` evaluated at ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        return (mpmath.e * (t + L) / (L * t)) ** t


def probability_within_bound(L: int, t: int, dps: int = 60) -> bool:
    prob = legal_path_probability(L, t)
    with mpmath.workdps(dps):
        lhs = mpmath.mpf(prob.numerator) / prob.denominator
        return bool(lhs <= legal_path_bound(L, t, dps))


# -- level balance ---------------------------------------------------------

@dataclass
class LevelBalance:
    counts: list[int]
    m: int
    L: int

    @property
    def max_ratio(self) -> float:
        """``max_l |{x : h(x) = l}| / (m / L)``."""
        if self.m == 0:
            return 0.0
        return max(self.counts) * self.L / self.m


def level_balance_check(rf: RankingFunction, queried: Iterable[int]) -> LevelBalance:
    ids = list(queried)
    if len(set(ids)) != len(ids):
        raise ParameterError("queried ids must be distinct")
    counts = [0] * rf.L
    for v in ids:
        counts[rf.level(v) - 1] += 1
    return LevelBalance(counts=counts, m=len(ids), L=rf.L)
