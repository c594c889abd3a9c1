"""Bounded discrete logarithms by baby-step giant-step.

Solves ``target = base^beta`` for signed ``beta`` in ``[-bound, bound]`` by
searching ``beta + bound`` in ``[0, 2*bound]``.
"""

from __future__ import annotations

from functools import lru_cache
from math import isqrt

from .errors import ParameterError, RangeError
from .group import SchnorrGroup


class DlogTable:
    """Baby steps ``base^j -> j`` for ``0 <= j < m`` with ``m = ceil(sqrt(2*bound + 1))``.

    Read-only once built.
    """

    def __init__(self, group: SchnorrGroup, base: int, bound: int):
        if bound < 0:
            raise ParameterError("bound must be non-negative")
        self.group = group
        self.base = base
        self.bound = bound
        width = 2 * bound + 1
        self.m = max(1, isqrt(width - 1) + 1)
        baby = {}
        x = 1
        for j in range(self.m):
            baby.setdefault(x, j)
            x = group.mul(x, base)
        self.baby = baby
        # x == base^m here
        self.stride = group.inv(x)
        self.offset = group.exp_small(base, bound)

    def __len__(self):
        return len(self.baby)

    def solve(self, target: int) -> int:
        g = self.group
        y = g.mul(target, self.offset)
        limit = 2 * self.bound
        for i in range(limit // self.m + 1):
            j = self.baby.get(y)
            if j is not None:
                shifted = i * self.m + j
                if shifted <= limit:
                    return shifted - self.bound
                break
            y = g.mul(y, self.stride)
        raise RangeError(f"discrete log outside [-{self.bound}, {self.bound}]")


@lru_cache(maxsize=32)
def table_for(group: SchnorrGroup, base: int, bound: int) -> DlogTable:
    """Shared table per ``(group, base, bound)``."""
    return DlogTable(group, base, bound)


def bsgs_solve(target: int, table: DlogTable) -> int:
    return table.solve(target)
