"""Desk-scale workbench for quantum key recovery on whitened block-cipher
constructions: exact circuit simulation, database-reuse attacks, classical
baselines, and security-bound evaluators."""

from .ciphers import (
    ConstructionKind,
    IdealCipher,
    KeyDerivation,
    KeyMaterial,
    Permutation,
    derive_related_key,
    derive_seed,
    make_construction,
    make_ideal_cipher,
    make_permutation,
)
from .gf2 import GF2Matrix, PeriodResult, dot, nullspace_basis, rank, recover_period
from .offline_simon import (
    AttackReport,
    QueryDatabase,
    build_database_cpa,
    build_database_kpa,
    database_overlap,
    em_q2_attack,
    fidelity_bound,
    generalized_offline_simon,
    grover_meets_simon_attack,
    offline_simon_attack,
    test_key_guess,
)
from .qsim import (
    MeasurementOutcome,
    StateVector,
    amplitude_amplify,
    amplify_success_probability,
    apply_inplace_perm,
    apply_xor_oracle,
    grover_iterations,
    hadamard,
    measure,
    simon_full,
    simon_subroutine,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
