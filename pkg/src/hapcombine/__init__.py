"""Consensus haplotype phasing.

Combine the haplotype reconstructions that several phasing tools produce
for the same genotypes into a single consensus, either by selecting the
member closest to all others or by voting for the best consistent pair,
under switch, pair-Hamming, or windowed Hamming distances.  Includes
evaluation against known truth, disagreement-based outlier detection,
synthetic data generation, and a batch CLI.
"""

from .combine import (
    CERTIFIED_OPTIMAL,
    EXACT_BY_CONSTRUCTION,
    EXACT_BY_ENUMERATION,
    HEURISTIC,
    CombineResult,
    DPTable,
    OrderingVector,
    SolverLimits,
    TiePolicy,
    certify_induced_ordering,
    combine,
    hamming_vote_given_ordering,
    select_hsp,
    vote_hamming,
    vote_hamming_enumerate,
    vote_hamming_gray,
    vote_hamming_induced,
    vote_k_hamming,
    vote_switch,
)
from .core import (
    HET,
    HOM0,
    HOM1,
    MISSING,
    EmptyEnsembleError,
    Ensemble,
    Genotype,
    HapcombineError,
    HaplotypePair,
    HetIndex,
    LengthMismatchError,
    SwitchSequence,
    TooLargeError,
    ValidationError,
    ValidationReport,
    build_ensemble,
    canonical_orientation,
    from_switch_sequence,
    genotype_from_pair,
    het_positions,
    to_switch_sequence,
    validate_pair,
)
from .distance import (
    DistanceSpec,
    InvalidKError,
    distance,
    hamming_pair,
    hamming_seq,
    k_hamming,
    switch_distance,
)
from .evaluate import (
    AuditReport,
    EvalReport,
    MissingTruthError,
    OutlierReport,
    approx_audit,
    distance_matrix,
    ensemble_disagreement,
    outlier_scores,
    switch_error,
    total_error,
)
from .io import (
    DuplicateIdError,
    ParseError,
    parse_genotype_file,
    parse_haplotype_file,
    write_genotype_file,
    write_haplotype_file,
)
from .simulate import (
    NoiseSpec,
    SimConfig,
    brute_force_hvp,
    brute_force_orderings,
    candidate_scores,
    gen_truth,
    perturb,
    random_ensemble,
    simulate_individual,
)

__version__ = "0.1.0"
