"""Exact pricing: heaviest all-ones submatrix inside a maximal biclique.

Given edge weights (a master dual), pricing finds the biclique whose
edge-weight sum is largest.  It is enough to search inside each maximal
biclique: every biclique lives under one, and for a fixed row subset R
the best column subset is the closure C(R) of columns with positive
weight sum, so enumerating row subsets of maximal bicliques covers the
entire search space exactly.

The enumeration runs over the smaller side of the biclique (transposing
if needed) and refuses outright past `subset_limit` rows rather than
sampling; a wrong pricing maximum would silently break the lower bound
math downstream.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ._rational import ZERO
from .core import Biclique, EdgeWeights, bit_indices, is_valid_biclique
from .errors import ContractViolation, SizeCapExceeded

SUBSET_LIMIT = 1 << 20


@dataclass(frozen=True)
class PricedBiclique:
    biclique: Biclique
    value: object


def price_maximal(
    b: Biclique,
    weights: EdgeWeights,
    threshold,
    cap: int = 64,
    subset_limit: int = SUBSET_LIMIT,
) -> tuple[PricedBiclique, list[PricedBiclique]]:
    """Best-weight sub-biclique of `b`, plus all candidates above threshold.

    Args:
        b: a biclique of weights.matrix (usually maximal).
        weights: exact rational edge weights.
        threshold: candidates must have value strictly above this.
        cap: keep at most this many candidates, best first.
        subset_limit: refuse if 2^(smaller side) exceeds this.

    Returns:
        (maximizer, candidates).  The maximizer is always returned, even
        when nothing clears the threshold; if every weight in `b` is
        nonpositive it degenerates to the best single edge.  Ties in
        value prefer fewer edges, then the canonical biclique order.
    """
    if not is_valid_biclique(weights.matrix, b):
        raise ContractViolation("priced biclique is not valid in the weight matrix")
    rows = bit_indices(b.row_set)
    cols = bit_indices(b.col_set)
    transposed = len(cols) < len(rows)
    if transposed:
        rows, cols = cols, rows
    k, n = len(rows), len(cols)
    if k > 0 and (1 << k) > subset_limit:
        raise SizeCapExceeded(
            f"pricing rows={b.row_set:#x} cols={b.col_set:#x} needs 2^{k} subsets",
            1 << k, subset_limit)

    if transposed:
        grid = [[weights.at(cj, ri) for cj in cols] for ri in rows]
    else:
        grid = [[weights.at(ri, cj) for cj in cols] for ri in rows]

    best = None  # (value, local row mask, local col mask)
    found: list[tuple] = []
    colsum = [ZERO] * n

    def consider(value, rmask, cmask):
        nonlocal best
        if best is None:
            best = (value, rmask, cmask)
            return
        if value != best[0]:
            if value > best[0]:
                best = (value, rmask, cmask)
            return
        edges = rmask.bit_count() * cmask.bit_count()
        bedges = best[1].bit_count() * best[2].bit_count()
        if (edges, rmask, cmask) < (bedges, best[1], best[2]):
            best = (value, rmask, cmask)

    def scan(i, rmask):
        if i == k:
            if not rmask:
                return
            value = ZERO
            cmask = 0
            for j in range(n):
                s = colsum[j]
                if s > 0:
                    value += s
                    cmask |= 1 << j
            if cmask:
                consider(value, rmask, cmask)
                if value > threshold:
                    found.append((value, rmask, cmask))
            return
        scan(i + 1, rmask)
        w = grid[i]
        for j in range(n):
            colsum[j] += w[j]
        scan(i + 1, rmask | (1 << i))
        for j in range(n):
            colsum[j] -= w[j]

    scan(0, 0)

    if best is None:
        # All weights nonpositive: the single heaviest edge is optimal.
        bi, bj = 0, 0
        for i in range(k):
            for j in range(n):
                if grid[i][j] > grid[bi][bj]:
                    bi, bj = i, j
        best = (grid[bi][bj], 1 << bi, 1 << bj)

    def lift(value, rmask, cmask) -> PricedBiclique:
        rset = 0
        for i in bit_indices(rmask):
            rset |= 1 << rows[i]
        cset = 0
        for j in bit_indices(cmask):
            cset |= 1 << cols[j]
        if transposed:
            rset, cset = cset, rset
        return PricedBiclique(Biclique(rset, cset), value)

    found.sort(key=lambda t: (-t[0], t[1].bit_count() * t[2].bit_count(), t[1], t[2]))
    candidates = [lift(*t) for t in found[:cap]]
    return lift(*best), candidates


def _price_task(args):
    b, weights, threshold, cap, limit = args
    return price_maximal(b, weights, threshold, cap, limit)


def price_all(
    maximals,
    weights: EdgeWeights,
    threshold,
    per_cap: int = 64,
    global_cap: int = 4096,
    workers: int = 1,
    subset_limit: int = SUBSET_LIMIT,
) -> tuple[object, list[PricedBiclique]]:
    """Price every maximal biclique and merge the results.

    Returns (alpha, candidates) where alpha is the true maximum biclique
    weight over the whole matrix.  Candidates are deduplicated, sorted
    by value descending (ties by canonical order), and truncated to
    `global_cap`.  With workers > 1 the bicliques are priced in a
    process pool; results are merged in input order, so the output is
    identical to a serial run.
    """
    maximals = list(maximals)
    if not maximals:
        raise ContractViolation("pricing needs at least one maximal biclique")
    tasks = [(b, weights, threshold, per_cap, subset_limit) for b in maximals]
    if workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_price_task, tasks, chunksize=chunk))
    else:
        results = [_price_task(t) for t in tasks]

    alpha = None
    merged: dict[tuple[int, int], PricedBiclique] = {}
    for maximizer, cands in results:
        if alpha is None or maximizer.value > alpha:
            alpha = maximizer.value
        for pb in cands:
            key = (pb.biclique.row_set, pb.biclique.col_set)
            if key not in merged:
                merged[key] = pb
    ordered = sorted(
        merged.values(),
        key=lambda pb: (-pb.value, pb.biclique.row_set, pb.biclique.col_set))
    return alpha, ordered[:global_cap]
