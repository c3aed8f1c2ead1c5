"""spiderlab: random spider tree growth, exact index analytics, and
Monte Carlo diagnostics."""

from .tree import (
    GrowthModel,
    InvalidProbabilityError,
    Preferential,
    RngStream,
    TreeState,
    UniformLeaf,
    degree_multiset,
    grow,
    grow_legs,
    new_seed,
    step,
)
from .indices import (
    FORGOTTEN,
    GINI,
    GORDON_SCANTLEBURY,
    HOOVER,
    LEAVES,
    NAMED_INDICES,
    PLATT,
    ZAGREB,
    Affine,
    Forgotten,
    GeneralizedZagreb,
    Generic,
    Gini,
    GordonScantlebury,
    Hoover,
    Identity,
    IndexSpec,
    Leaves,
    Platt,
    Table,
    UnknownIndexError,
    Zagreb,
    eval_direct,
    eval_reduced,
    index_name,
    parse_index,
    reduced_values,
)
from .analytics import (
    CATALOG_KEYS,
    LeafLaw,
    MomentCatalogEntry,
    affine_mgf,
    catalog_entry_json,
    coefficient_triangle,
    export_catalog_json,
    leaf_mgf,
    leaf_moment_expansion,
    leaf_pmf,
    leaf_raw_moment_asymptotic,
    leaf_raw_moment_exact,
    moment_catalog,
    oracle_moment,
    support_pmf,
)
from .montecarlo import (
    SampleSummary,
    SimConfig,
    convergence_probe,
    ks_normal,
    run_experiment,
    standardize,
)

__version__ = "0.1.0"
