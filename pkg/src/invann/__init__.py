"""Approximate near neighbour search with function-inversion indexes."""

from .all_inversion import (
    AllInverter,
    InverterConfig,
    InvertStats,
    RandomKeys,
    TableKeys,
    brute_preimage,
    build_all_inverter,
    invert_all,
    load_inverter,
    save_inverter,
)
from .analysis import ExponentReport, alpha, alpha_manhattan, alrw_exponent, optimal_rho_u, report_table, rho_q_from
from .ann import (
    ANN_INVERTER_CONFIG,
    ClassicIndex,
    InvertedIndex,
    QueryResult,
    build_classic,
    build_inverted,
    family_for,
    memory_footprint,
    query_classic,
    query_inverted,
)
from .core import (
    Dataset,
    FormatError,
    Metric,
    PlantedSpec,
    distance,
    distances,
    generate_planted,
    load_dataset,
    load_query,
    perturbed_query,
    save_dataset,
    save_query,
)
from .inversion import EvalCounter, InversionTable, build_inversion, invert_one
from .lsh import (
    BitSampling,
    HashBattery,
    PlannerError,
    PStableEuclidean,
    SensitivityProfile,
    battery_build,
    battery_eval,
    concat_length,
    repetition_count,
)

__version__ = "0.1.0"

__all__ = [
    "AllInverter",
    "alpha",
    "alpha_manhattan",
    "alrw_exponent",
    "ANN_INVERTER_CONFIG",
    "battery_build",
    "battery_eval",
    "BitSampling",
    "brute_preimage",
    "build_all_inverter",
    "build_classic",
    "build_inversion",
    "build_inverted",
    "ClassicIndex",
    "concat_length",
    "Dataset",
    "distance",
    "distances",
    "EvalCounter",
    "ExponentReport",
    "family_for",
    "FormatError",
    "generate_planted",
    "HashBattery",
    "InversionTable",
    "invert_all",
    "invert_one",
    "InvertedIndex",
    "InverterConfig",
    "InvertStats",
    "load_dataset",
    "load_inverter",
    "load_query",
    "memory_footprint",
    "Metric",
    "optimal_rho_u",
    "perturbed_query",
    "PlannerError",
    "PlantedSpec",
    "PStableEuclidean",
    "query_classic",
    "query_inverted",
    "QueryResult",
    "RandomKeys",
    "repetition_count",
    "report_table",
    "rho_q_from",
    "save_dataset",
    "save_inverter",
    "save_query",
    "SensitivityProfile",
    "TableKeys",
]
