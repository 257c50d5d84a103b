"""Combinatorial bounds and the root-interval report."""

from decimal import ROUND_HALF_EVEN, Decimal

import pytest

from fracbp._rational import rat
from fracbp.bounds import (
    decimal_root,
    fooling_set,
    fractional_cover_number,
    integer_cover_number,
    integer_partition_number,
    power_root_lower_bound,
    product_lower_bound,
    quantize6,
    sandwich_report,
)
from fracbp.core import BinaryMatrix, crown, parse_matrix
from fracbp.errors import InvariantViolation, SizeCapExceeded
from oracles import brute_fooling_sets, random_binary_matrix

D6 = Decimal("0.000001")


def is_fooling_pair(a, one, other):
    (i1, j1), (i2, j2) = one, other
    return not (a.entry(i1, j2) and a.entry(i2, j1))


# ---------------------------------------------------------------------------
# Fooling sets
# ---------------------------------------------------------------------------

def test_domino_fooling_number_is_two(d):
    found = fooling_set(d)
    assert len(found) == brute_fooling_sets(d) == 2
    for k, one in enumerate(found):
        assert d.entry(*one)
        for other in found[k + 1:]:
            assert is_fooling_pair(d, one, other)


def test_crown_fooling_number_is_three(crown5):
    assert len(fooling_set(crown5)) == brute_fooling_sets(crown5) == 3


def test_identity_diagonal_is_a_fooling_set():
    eye = parse_matrix("100\n010\n001")
    assert len(fooling_set(eye)) == 3


def test_all_ones_block_fools_nothing():
    block = parse_matrix("111\n111\n111")
    assert len(fooling_set(block)) == 1


def test_fooling_set_matches_brute_force(rng):
    for _ in range(40):
        a = random_binary_matrix(rng)
        found = fooling_set(a)
        assert len(found) == brute_fooling_sets(a)
        for k, one in enumerate(found):
            for other in found[k + 1:]:
                assert is_fooling_pair(a, one, other)


def test_fooling_set_refuses_too_many_ones(d):
    with pytest.raises(SizeCapExceeded):
        fooling_set(d, cap=3)


# ---------------------------------------------------------------------------
# Cover and integer numbers
# ---------------------------------------------------------------------------

def test_fractional_cover_of_domino(d):
    assert fractional_cover_number(d) == 2


def test_fractional_cover_of_crown(crown5):
    assert fractional_cover_number(crown5) == rat(10, 3)


def test_integer_partition_of_domino(d):
    value, parts, _ = integer_partition_number(d)
    assert value == len(parts) == 3
    seen = 0
    for b in parts:
        col = sum(1 << d.edge_index[(i, j)]
                  for (i, j) in d.edges
                  if (b.row_set >> i) & 1 and (b.col_set >> j) & 1)
        assert seen & col == 0
        seen |= col
    assert seen == (1 << d.num_edges) - 1


def test_integer_cover_of_domino(d):
    value, parts, _ = integer_cover_number(d)
    assert value == len(parts) == 2
    covered = 0
    for b in parts:
        for (i, j) in d.edges:
            if (b.row_set >> i) & 1 and (b.col_set >> j) & 1:
                covered |= 1 << d.edge_index[(i, j)]
    assert covered == (1 << d.num_edges) - 1


def test_integer_numbers_sandwich_the_fractional_ones(rng):
    for _ in range(15):
        a = random_binary_matrix(rng, max_rows=3, max_cols=3)
        bc, _, _ = integer_cover_number(a)
        bp, _, _ = integer_partition_number(a)
        assert len(fooling_set(a)) <= bc <= bp
        assert fractional_cover_number(a) <= bc


# ---------------------------------------------------------------------------
# Roots and quantization
# ---------------------------------------------------------------------------

def test_decimal_root_is_exact_on_perfect_powers():
    assert decimal_root(rat(5, 2), 1) == Decimal("2.5")
    assert quantize6(decimal_root(rat(64), 3)) == Decimal("4.000000")


def test_decimal_root_squares_back():
    root = decimal_root(rat(6), 2)
    assert abs(root * root - 6) < Decimal("1e-45")


def test_quantize6_half_even_and_ceiling():
    down = Decimal("2.3727122472")
    up = Decimal("2.3996985701")
    assert quantize6(down) == Decimal("2.372712")
    assert quantize6(down, ceiling=True) == Decimal("2.372713")
    assert quantize6(up) == Decimal("2.399699")
    assert quantize6(up, ceiling=True) == Decimal("2.399699")


def test_power_root_lower_bound_table():
    # bc * (bp/bc)^(1/k) for bp=5/2, bc=2.
    expected = ["2.500", "2.236", "2.154", "2.115", "2.091"]
    for k, text in enumerate(expected, start=1):
        bound = power_root_lower_bound(rat(5, 2), rat(2), k)
        assert bound.unrooted == rat(5, 2) * rat(2) ** (k - 1)
        got = bound.root.quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN)
        assert got == Decimal(text)


def test_product_lower_bound_picks_the_better_side():
    assert product_lower_bound(rat(2), rat(6), rat(5, 2), rat(4)) == 12
    assert product_lower_bound(rat(1), rat(2), rat(5), rat(3)) == 15


# ---------------------------------------------------------------------------
# Sandwich report
# ---------------------------------------------------------------------------

UPPERS3 = {1: rat(5, 2), 2: rat(6), 3: rat(2059, 149)}


def test_sandwich_rows_for_three_powers(d):
    report = sandwich_report(d, dict(UPPERS3))
    assert report.fooling == 2
    assert report.cover_value == 2
    assert report.partition_value == rat(5, 2)
    assert [row.k for row in report.rows] == [1, 2, 3]
    upper_roots = [quantize6(row.upper_root) for row in report.rows]
    assert upper_roots == [Decimal("2.500000"), Decimal("2.449490"),
                           Decimal("2.399699")]
    lower_roots = [quantize6(row.lower_root) for row in report.rows]
    assert lower_roots == [Decimal("2.500000"), Decimal("2.236068"),
                           Decimal("2.154435")]
    assert report.interval_lower == rat(2)
    assert report.interval_upper == Decimal("2.399699")


def test_sandwich_interval_tightens_with_the_fifth_power(d):
    uppers = dict(UPPERS3)
    uppers[5] = rat(75_201_302, 1_000_000)
    report = sandwich_report(d, uppers)
    assert [row.k for row in report.rows] == [1, 2, 3, 4, 5]
    assert report.rows[3].upper_value is None
    assert report.rows[3].upper_root is None
    assert quantize6(report.rows[3].best_upper_root) == Decimal("2.399699")
    assert quantize6(report.rows[4].upper_root) == Decimal("2.372712")
    best = [row.best_upper_root for row in report.rows]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert report.interval_lower == rat(2)
    assert report.interval_upper == Decimal("2.372713")


def test_sandwich_computes_base_value_when_missing(d):
    report = sandwich_report(d, {2: rat(6)})
    assert report.partition_value == rat(5, 2)
    assert [row.k for row in report.rows] == [1, 2]


def test_sandwich_extends_to_requested_power(d):
    report = sandwich_report(d, dict(UPPERS3), kmax=4)
    assert [row.k for row in report.rows] == [1, 2, 3, 4]
    assert report.rows[3].upper_value is None
    assert quantize6(report.rows[3].lower_root) == Decimal("2.114743")


def test_sandwich_rejects_upper_below_cover_power(d):
    with pytest.raises(InvariantViolation):
        sandwich_report(d, {1: rat(5, 2), 2: rat(3)})
    with pytest.raises(InvariantViolation):
        sandwich_report(d, {1: rat(3, 2)})


def test_sandwich_rejects_upper_below_product_bound(d):
    # The k=3 bound from bp*bc^2 is 10; anything smaller is impossible.
    with pytest.raises(InvariantViolation):
        sandwich_report(d, {1: rat(5, 2), 3: rat(9)})


def test_sandwich_respects_fooling_cap(d):
    with pytest.raises(SizeCapExceeded):
        sandwich_report(d, dict(UPPERS3), fooling_cap=3)


def test_sandwich_on_crown(crown5):
    report = sandwich_report(crown5, {})
    assert report.fooling == 3
    assert report.cover_value == rat(10, 3)
    assert report.partition_value == rat(10, 3)
    assert report.interval_lower == rat(10, 3)
