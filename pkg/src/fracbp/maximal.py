"""Maximal biclique enumeration and Kronecker lifting.

The pricing step only ever needs inclusion-maximal bicliques: every
biclique extends to a maximal one, and the positive-column closure used
there maximizes over sub-bicliques implicitly.  For Kronecker powers the
maximal bicliques of the power are exactly the products of maximal
bicliques of the factors, so they are lifted instead of re-enumerated.
"""

from .core import (
    Biclique,
    BinaryMatrix,
    kronecker_biclique,
    maximal_biclique_masks,
)
from .errors import EmptyGraphError


def enumerate_maximal(a: BinaryMatrix) -> list[Biclique]:
    """All inclusion-maximal bicliques of `a`, canonically sorted.

    Every edge of `a` is covered by at least one returned biclique.
    Raises EmptyGraphError when the matrix has no ones.
    """
    if a.num_edges == 0:
        raise EmptyGraphError("matrix has no ones")
    return [Biclique(r, c) for r, c in maximal_biclique_masks(a)]


def lift_maximal_kronecker(
    base_maximals: list[Biclique], k: int, base_shape: tuple[int, int]
) -> list[Biclique]:
    """Maximal bicliques of the k-th Kronecker power of the base matrix.

    Association matches `kronecker_power`: level k is built as
    (level k-1) x base, so bitsets line up with the power's indexing.

    Args:
        base_maximals: maximal bicliques of the base matrix.
        k: power, at least 1.
        base_shape: (num_rows, num_cols) of the base matrix.

    Returns:
        Canonically sorted list of 4^?-style product bicliques; for a
        base with t maximal bicliques this has t^k entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    level = list(base_maximals)
    for _ in range(k - 1):
        level = [
            kronecker_biclique(prev, b, base_shape)
            for prev in level
            for b in base_maximals
        ]
    return sorted(set(level))
