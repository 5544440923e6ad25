"""Numerical checks of the norm Schwarz inequality ``||A # (B* A^-1 B)|| >= ||B||``.

The geometric mean, the conditional expectation onto the commutant of a
unitary, checkers for the inequality and its equivalent reformulations,
and tools that build explicit counterexamples.
"""

from .conjectures import (
    CONJECTURE_IDS,
    CheckReport,
    check,
    check_conj1,
    check_conj2,
    check_conj3,
    check_dagger,
    check_ddagger,
    check_halfpower,
    check_trace_i,
    check_trace_ii,
    check_two_term,
    construct_conj1_counterexample,
    embed_cyclic,
    paper_counterexample,
)
from .expectation import SpectralDecomposition, expect_u, expect_u_power_avg, spectral_projections
from .linalg import (
    HermitianMatrix,
    NormalMatrix,
    PositiveDefiniteMatrix,
    UnitaryMatrix,
    hermitian_eig,
    is_normaloid,
    normal_eig,
    operator_norm,
    polar_normal,
    random_normal,
    random_pd,
    random_unitary,
    spectral_radius,
    sqrt_psd,
)
from .means import gmean, gmean_2x2

__version__ = "0.1.0"
