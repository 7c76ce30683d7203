"""Periodic functions, expression parsing, quadrature and sign analysis."""

from .functions import (
    TWO_PI,
    CircleFunction,
    check_periods,
    constant,
    from_callable,
    from_samples,
    inner_product,
    load_csv,
    parse_expression,
    read_csv,
    write_csv,
)
from .quadrature import DEFAULT_RULE, QuadratureRule, gauss_legendre
from .signs import (
    SignChangeReport,
    count_sign_changes,
    find_alternation_points,
    probe_grid,
)

__all__ = [
    "TWO_PI",
    "CircleFunction",
    "DEFAULT_RULE",
    "QuadratureRule",
    "SignChangeReport",
    "check_periods",
    "constant",
    "count_sign_changes",
    "find_alternation_points",
    "from_callable",
    "from_samples",
    "gauss_legendre",
    "inner_product",
    "load_csv",
    "parse_expression",
    "probe_grid",
    "read_csv",
    "write_csv",
]
