"""Flip-count summaries that merge exactly.

Counts are integers, so ``sum`` and ``sum_sq`` are kept as Python ints and
merging is exact and order independent. Only ``mean`` and ``sd`` are
rounded, when they are read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# two-sided normal quantile at significance 1e-4
Z_1E4 = 3.891


@dataclass(frozen=True)
class FlipStats:
    count: int = 0
    sum: int = 0
    sum_sq: int = 0
    min: int | None = None
    max: int | None = None

    @classmethod
    def from_values(cls, values: Iterable[int] | np.ndarray) -> "FlipStats":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                         dtype=np.int64)
        if arr.size == 0:
            return cls()
        s = int(arr.sum())
        top = int(np.abs(arr).max())
        if top * top * arr.size < 2**62:
            sq = int(np.dot(arr, arr))
        else:
            sq = sum(v * v for v in arr.tolist())
        return cls(int(arr.size), s, sq, int(arr.min()), int(arr.max()))

    def merge(self, other: "FlipStats") -> "FlipStats":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        return FlipStats(
            self.count + other.count,
            self.sum + other.sum,
            self.sum_sq + other.sum_sq,
            min(self.min, other.min),
            max(self.max, other.max),
        )

    __add__ = merge

    @property
    def mean(self) -> float:
        return self.sum / self.count if self.count else math.nan

    @property
    def sd(self) -> float:
        """Sample standard deviation (n - 1 denominator); 0 for a single value."""
        n = self.count
        if n == 0:
            return math.nan
        if n == 1:
            return 0.0
        # exact integer numerator: n*sum_sq - sum^2 = n(n-1) s^2
        num = n * self.sum_sq - self.sum * self.sum
        return math.sqrt(num / (n * (n - 1)))

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.count) if self.count else math.nan

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "max": self.max,
            "sum": self.sum,
            "sum_sq": self.sum_sq,
        }


def binomial_halfwidth(q: float, n: int, z: float = Z_1E4) -> float:
    return z * math.sqrt(max(q * (1.0 - q), 0.0) / n)


def z_test_proportion(successes: int, n: int, target: float, z: float = Z_1E4) -> bool:
    """Two-sided z-test of an observed proportion against ``target``.

    Uses the variance under the null. A degenerate target (0 or 1) passes
    only when every observation agrees with it.
    """
    mean = successes / n
    half = binomial_halfwidth(target, n, z)
    if half == 0.0:
        return mean == target
    return abs(mean - target) <= half
