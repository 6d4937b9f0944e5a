"""Sieve for r_3(n), the number of ordered representations n = x1^3 + x2^3 + x3^3
with positive integers x_i, plus partial sums and residue-class sums."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

# bytes of counter memory a single table may occupy (uint32 per n)
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


class CapacityError(MemoryError):
    """Requested table or modulus exceeds the configured capacity."""


class RangeError(ValueError):
    """Query outside the range covered by a table."""


def icbrt(n: int) -> int:
    """Largest integer c with c^3 <= n."""
    if n < 1:
        return 0
    c = int(round(n ** (1.0 / 3.0)))
    while c**3 > n:
        c -= 1
    while (c + 1) ** 3 <= n:
        c += 1
    return c


@dataclass(eq=False)
class CubeRepTable:
    """counts[n] = r_3(n) for 0 <= n <= x_max (counts[0] is always 0)."""

    x_max: int
    counts: np.ndarray
    _prefix: np.ndarray | None = field(default=None, repr=False)
    _prefix_sq: np.ndarray | None = field(default=None, repr=False)
    _support: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.counts.shape != (self.x_max + 1,):
            raise ValueError("counts must have length x_max + 1")
        self.counts.setflags(write=False)

    def _check(self, x: int) -> None:
        if x < 1 or x > self.x_max:
            raise RangeError(f"x={x} outside [1, {self.x_max}]")

    @property
    def prefix(self) -> np.ndarray:
        if self._prefix is None:
            self._prefix = np.cumsum(self.counts, dtype=np.int64)
        return self._prefix

    @property
    def prefix_sq(self) -> np.ndarray:
        if self._prefix_sq is None:
            c = self.counts.astype(np.int64)
            peak = int(c.max()) if c.size else 0
            if peak * peak * (self.x_max + 1) >= 2**63:
                raise OverflowError("sum of r_3(n)^2 would overflow int64")
            self._prefix_sq = np.cumsum(c * c, dtype=np.int64)
        return self._prefix_sq

    def support(self, x: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(n, r_3(n)) over n <= x with r_3(n) > 0, as int64 arrays."""
        if self._support is None:
            n = np.flatnonzero(self.counts).astype(np.int64)
            self._support = (n, self.counts[n].astype(np.int64))
        n, r = self._support
        if x is None or x >= self.x_max:
            return n, r
        k = int(np.searchsorted(n, x, side="right"))
        return n[:k], r[:k]

    def restrict(self, x_max: int) -> "CubeRepTable":
        """A table covering only n <= x_max (shares no state)."""
        self._check(x_max)
        return CubeRepTable(x_max, self.counts[: x_max + 1].copy())


def _sieve_block(x_max: int, x1_values: range) -> np.ndarray:
    """Accumulate orbit sizes of unordered triples x1 <= x2 <= x3 with given x1."""
    idx_parts, w_parts = [], []
    for x1 in x1_values:
        c1 = x1**3
        for x2 in range(x1, icbrt((x_max - c1) // 2) + 1):
            base = c1 + x2**3
            top = icbrt(x_max - base)
            if top < x2:
                break
            x3 = np.arange(x2, top + 1, dtype=np.int64)
            orbit = np.full(x3.shape, 6 if x1 != x2 else 3, dtype=np.int64)
            eq = x3 == x2
            orbit[eq] = 3 if x1 != x2 else 1
            idx_parts.append(base + x3**3)
            w_parts.append(orbit)
    if not idx_parts:
        return np.zeros(x_max + 1, dtype=np.int64)
    idx = np.concatenate(idx_parts)
    w = np.concatenate(w_parts)
    # float64 bincount is exact: per-cell totals are far below 2**53
    return np.bincount(idx, weights=w, minlength=x_max + 1).astype(np.int64)


def sieve_r3(
    x_max: int,
    workers: int = 1,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> CubeRepTable:
    """Build the r_3 table up to x_max.

    Only triples x1 <= x2 <= x3 are enumerated; each contributes the size of its
    permutation orbit (1, 3 or 6). With ``workers > 1`` the x1 values are dealt
    round-robin to workers, accumulated privately and summed, so the result does
    not depend on the worker count.
    """
    if x_max < 1:
        raise ValueError(f"x_max must be >= 1, got {x_max}")
    if 4 * (x_max + 1) > memory_budget:
        raise CapacityError(f"x_max={x_max} needs more than {memory_budget} bytes")
    x1_top = icbrt(x_max // 3)
    if x1_top < 1:
        return CubeRepTable(x_max, np.zeros(x_max + 1, dtype=np.uint32))
    workers = max(1, int(workers))
    # interleave x1 across workers so blocks have comparable cost
    blocks = [range(1 + w, x1_top + 1, workers) for w in range(workers)]
    if workers == 1:
        total = _sieve_block(x_max, blocks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _sieve_block(x_max, b), blocks))
        total = parts[0]
        for p in parts[1:]:
            total += p
    if total.max(initial=0) >= 2**32:
        raise OverflowError("r_3(n) exceeds 32-bit counter")
    return CubeRepTable(x_max, total.astype(np.uint32))


def sum_r3(table: CubeRepTable, x: int) -> int:
    table._check(x)
    return int(table.prefix[x])


def sum_r3_squared(table: CubeRepTable, x: int) -> int:
    table._check(x)
    return int(table.prefix_sq[x])


def progression_sums(table: CubeRepTable, x: int, q: int) -> np.ndarray:
    """Upsilon(x; q, a) for a = 1..q (entry a-1); the last entry is the class n = 0 mod q."""
    table._check(x)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    n, r = table.support(x)
    by_residue = np.bincount(n % q, weights=r, minlength=q).astype(np.int64)
    return np.roll(by_residue, -1)


def upper_exponent_profile(table: CubeRepTable, grid) -> list[tuple[int, float]]:
    """(x, log(sum_{n<=x} r_3(n)^2) / log x) for each x in the grid."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    out = []
    for x in grid:
        x = int(x)
        s2 = sum_r3_squared(table, x)
        if x < 2 or s2 == 0:
            raise ValueError(f"exponent undefined at x={x} (sum of squares {s2})")
        out.append((x, math.log(s2) / math.log(x)))
    return out


def estimate_upper_exponent(table: CubeRepTable, grid) -> float:
    """Finite-grid proxy for the upper exponent: max of the per-point log ratios."""
    points = upper_exponent_profile(table, grid)
    for x, e in points:
        log.info("exponent x=%d  log S2/log x = %.6f", x, e)
    return max(e for _, e in points)
