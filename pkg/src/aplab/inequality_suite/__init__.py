"""Inequality checks, stability studies and structural experiments."""

from .families import (
    FamilySpec,
    MemberSpec,
    TestFamily,
    default_family_spec,
    make_test_family,
    refinement_family_spec,
)
from .pointwise import (
    check_chebyshev,
    check_local_of_maximal,
    check_mla,
    check_prop_splitting,
    cf_pointwise_check,
    cf_stability,
    coifman_rochberg_ratio,
    coifman_rochberg_stability,
    decay_check,
    hilbert_inequality_sweep,
    sharp_delta_bound_check,
    sweep_chebyshev,
    sweep_local_of_maximal,
    sweep_mla,
    sweep_sharp_delta,
    sweep_splitting,
)
from .reports import FAIL, INCONCLUSIVE, PASS, CheckReport
from .structural import (
    GALLERY,
    LAMBDA_GRID,
    CoherenceRow,
    LambdaSearchResult,
    coherence_table,
    default_epsilon,
    doubling_step_check,
    fs_inequality_ratio,
    localization_check,
    search_lambda0,
    support_check_rq,
    wp_ratio,
)
