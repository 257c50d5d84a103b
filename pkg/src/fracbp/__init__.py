"""Exact fractional biclique partition and cover numbers.

Binary matrices are bipartite graphs; this package computes the
fractional (and integer) minimum number of bicliques needed to
partition or cover their ones, exactly, with column generation doing
the heavy lifting on Kronecker powers.
"""

from ._rational import rat, rat_from_str
from .bounds import (
    fooling_set,
    fooling_set_number,
    fractional_cover_number,
    integer_cover_number,
    integer_partition_number,
    power_root_lower_bound,
    product_lower_bound,
    sandwich_report,
)
from .colgen import ColGenConfig, ColGenReport, initial_stars, run, solve_power
from .core import (
    Biclique,
    BinaryMatrix,
    EdgeWeights,
    crown,
    domino,
    enumerate_all_bicliques,
    format_matrix,
    is_valid_biclique,
    kronecker,
    kronecker_biclique,
    kronecker_power,
    load_matrix,
    matrix_hash,
    parse_matrix,
)
from .errors import (
    CheckpointError,
    ContractViolation,
    EmptyGraphError,
    FracbpError,
    InvariantViolation,
    MatrixFormatError,
    NodeCapExceeded,
    SizeCapExceeded,
)
from .lp import COVER, PARTITION, LinearProgram, build_master, solve, solve_integer
from .maximal import enumerate_maximal, lift_maximal_kronecker
from .pricing import price_all, price_maximal

__version__ = "0.1.0"

__all__ = [
    "Biclique",
    "BinaryMatrix",
    "CheckpointError",
    "ColGenConfig",
    "ColGenReport",
    "ContractViolation",
    "COVER",
    "crown",
    "domino",
    "EdgeWeights",
    "EmptyGraphError",
    "enumerate_all_bicliques",
    "enumerate_maximal",
    "fooling_set",
    "fooling_set_number",
    "format_matrix",
    "FracbpError",
    "fractional_cover_number",
    "initial_stars",
    "integer_cover_number",
    "integer_partition_number",
    "InvariantViolation",
    "is_valid_biclique",
    "kronecker",
    "kronecker_biclique",
    "kronecker_power",
    "lift_maximal_kronecker",
    "LinearProgram",
    "load_matrix",
    "matrix_hash",
    "MatrixFormatError",
    "NodeCapExceeded",
    "parse_matrix",
    "PARTITION",
    "power_root_lower_bound",
    "price_all",
    "price_maximal",
    "product_lower_bound",
    "rat",
    "rat_from_str",
    "run",
    "sandwich_report",
    "SizeCapExceeded",
    "solve",
    "solve_integer",
    "solve_power",
    "build_master",
]
