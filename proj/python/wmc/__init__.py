"""Approximate weighted model counting and weighted sampling with XOR hashing."""

from ._wmc import (
    CountingError,
    Formula,
    OracleLimitError,
    ParamError,
    ParseError,
    Sampler,
    WeightError,
    Weights,
    count,
    counting_iterations,
    counting_pivot,
    exact,
    genbench,
    kappa_pivot,
    parse,
    partition_count,
    partitioned_count,
    random_kcnf,
    run_cli,
    serialize,
)

__all__ = [
    "CountingError",
    "Formula",
    "OracleLimitError",
    "ParamError",
    "ParseError",
    "Sampler",
    "WeightError",
    "Weights",
    "count",
    "counting_iterations",
    "counting_pivot",
    "exact",
    "genbench",
    "kappa_pivot",
    "parse",
    "partition_count",
    "partitioned_count",
    "random_kcnf",
    "run_cli",
    "serialize",
]
