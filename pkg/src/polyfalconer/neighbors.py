"""Exact closest-pair search by uniform grid bucketing on integer coordinates."""
from __future__ import annotations

import math
from collections import defaultdict
from typing import Callable

import numpy as np

from .exact import max_abs, widen

_FORWARD = ((0, 0), (1, -1), (1, 0), (1, 1), (0, 1))
_BATCH = 1 << 20


def closest_pair(
    coords: np.ndarray,
    dist: Callable[[np.ndarray], np.ndarray],
    cell_width: Callable[[int], int],
) -> tuple[int, tuple[int, int]]:
    """Minimum of ``dist`` over all pairs of rows of ``coords``.

    ``dist`` maps an (m, 2) array of coordinate differences to m integers and
    must be monotone in the true distance. ``cell_width(best)`` must bound
    ``|dx|`` and ``|dy|`` for every pair at distance ``<= best``. The bound
    found on lexicographic neighbours sets the bucket width, so every pair
    that could beat it sits in adjacent buckets.
    """
    n = len(coords)
    if n < 2:
        raise ValueError("closest pair needs at least two points")
    coords = widen(coords, 4)
    order = np.lexsort((coords[:, 1], coords[:, 0]))
    sc = coords[order]
    d0 = dist(sc[1:] - sc[:-1])
    k = int(np.argmin(d0))
    best = int(d0[k])
    pair = (int(order[k]), int(order[k + 1]))

    w = max(1, int(cell_width(best)))
    cells = defaultdict(list)
    cx = coords[:, 0] // w
    cy = coords[:, 1] // w
    for i, key in enumerate(zip(cx.tolist(), cy.tolist())):
        cells[key].append(i)
    cells = {key: np.asarray(v, dtype=np.int64) for key, v in cells.items()}

    left: list[np.ndarray] = []
    right: list[np.ndarray] = []
    pending = 0

    def flush():
        nonlocal best, pair, pending
        if not left:
            return
        I = np.concatenate(left)
        J = np.concatenate(right)
        left.clear()
        right.clear()
        pending = 0
        d = dist(coords[J] - coords[I])
        k = int(np.argmin(d))
        if int(d[k]) < best:
            best = int(d[k])
            pair = (int(I[k]), int(J[k]))

    for (x, y), members in cells.items():
        for dx, dy in _FORWARD:
            if (dx, dy) == (0, 0):
                if len(members) < 2:
                    continue
                iu, ju = np.triu_indices(len(members), 1)
                left.append(members[iu])
                right.append(members[ju])
            else:
                other = cells.get((x + dx, y + dy))
                if other is None:
                    continue
                left.append(np.repeat(members, len(other)))
                right.append(np.tile(other, len(members)))
            pending += len(left[-1])
            if pending >= _BATCH:
                flush()
    flush()
    return best, (min(pair), max(pair))


def euclid_sq(diff: np.ndarray) -> np.ndarray:
    diff = widen(diff, 2 * max_abs(diff))
    return diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1]


def euclid_cell_width(best_sq: int) -> int:
    return math.isqrt(best_sq) + 1
