"""Accuracy scoring, cross-method distance matrices, outlier detection, and
selection-vs-voting ratio audits.

Switch error against a known truth is the field's standard accuracy
measure.  Relative errors are normalized so they live in [0, 1]: switch
error by the m'-1 switch positions and pair-Hamming by its maximum 2m',
which makes a relative Hamming error of 1/2 the boundary below which the
induced-ordering certificate can fire.
"""

from dataclasses import dataclass

import numpy as np

from .combine import (
    CombineResult,
    SolverLimits,
    TiePolicy,
    select_hsp,
    vote_hamming,
    vote_k_hamming,
    vote_switch,
)
from .core import EmptyEnsembleError, Ensemble, HapcombineError, HaplotypePair, HetIndex, genotype_from_pair, het_positions
from .distance import HAMMING, KHAMMING, SWITCH, DistanceSpec, distance, hamming_pair, switch_distance


class MissingTruthError(HapcombineError):
    """A prediction has no matching truth individual."""


class AlignmentError(HapcombineError):
    """Reconstruction sets do not cover the same individuals."""


def switch_error(pred: HaplotypePair, truth: HaplotypePair, idx: HetIndex) -> int:
    """Switch distance between a prediction and the true pair."""
    return switch_distance(pred, truth, idx)


@dataclass(frozen=True)
class IndividualError:
    id: str
    switch_error: int
    relative_switch_error: float
    relative_hamming_error: float
    m_prime: int


@dataclass(frozen=True)
class EvalReport:
    """Per-individual errors (rows sorted by id) plus their totals."""

    rows: tuple
    total_switch_error: int
    total_relative_switch_error: float
    total_relative_hamming_error: float


def total_error(preds, truths, genotypes=None) -> EvalReport:
    """Score predictions against truths, individual by individual.

    ``preds`` and ``truths`` map individual id to a pair; every predicted
    id must have a truth (``MissingTruthError`` otherwise).  The genotype
    defaults to the one induced by the truth pair.
    """
    rows = []
    for ind in sorted(preds):
        if ind not in truths:
            raise MissingTruthError(f"no truth for individual {ind!r}")
        pred = preds[ind]
        truth = truths[ind]
        g = genotypes[ind] if genotypes else genotype_from_pair(truth, ind)
        idx = het_positions(g)
        mp = idx.m_prime
        err = switch_error(pred, truth, idx)
        rel_sw = err / (mp - 1) if mp > 1 else 0.0
        dh = hamming_pair(pred, truth)
        rel_h = dh / (2 * mp) if mp > 0 else 0.0
        rows.append(IndividualError(ind, err, rel_sw, rel_h, mp))
    return EvalReport(
        rows=tuple(rows),
        total_switch_error=sum(r.switch_error for r in rows),
        total_relative_switch_error=float(sum(r.relative_switch_error for r in rows)),
        total_relative_hamming_error=float(sum(r.relative_hamming_error for r in rows)),
    )


def distance_matrix(reconstruction_sets, spec: DistanceSpec, genotypes=None):
    """Summed pairwise distances between whole reconstruction sets.

    ``reconstruction_sets`` maps a method name to its ``{id: pair}`` map;
    all methods must cover the same individuals.  Entry (a, b) sums, over
    individuals, the distance between method a's and method b's pair.
    Returns ``(method_names, matrix)``.
    """
    methods = list(reconstruction_sets)
    if not methods:
        return [], np.zeros((0, 0), dtype=np.int64)
    ids = sorted(reconstruction_sets[methods[0]])
    for name in methods[1:]:
        if sorted(reconstruction_sets[name]) != ids:
            raise AlignmentError(f"method {name!r} covers different individuals")
    n = len(methods)
    mat = np.zeros((n, n), dtype=np.int64)
    for ind in ids:
        g = genotypes[ind] if genotypes else genotype_from_pair(
            reconstruction_sets[methods[0]][ind], ind
        )
        idx = het_positions(g)
        for a in range(n):
            pa = reconstruction_sets[methods[a]][ind]
            for b in range(a + 1, n):
                d = distance(spec, pa, reconstruction_sets[methods[b]][ind], idx)
                mat[a, b] += d
                mat[b, a] += d
    return methods, mat


def ensemble_disagreement(e: Ensemble, spec: DistanceSpec) -> int:
    """Sum of pairwise distances between the members of one ensemble."""
    total = 0
    idx = e.het_index
    for i in range(e.l):
        for j in range(i + 1, e.l):
            total += distance(spec, e.members[i], e.members[j], idx)
    return total


@dataclass(frozen=True)
class OutlierReport:
    """Per-individual member disagreement, ranked most-suspect first."""

    rows: tuple  # (id, disagreement), sorted by id
    ranking: tuple  # ids by decreasing disagreement
    correlation: float | None  # Pearson vs the designated prediction's error


def outlier_scores(ensembles, spec: DistanceSpec, truths=None, predictions=None) -> OutlierReport:
    """Rank individuals by how much their reconstructions disagree.

    ``ensembles`` maps id to an Ensemble with at least two members.  When
    ``truths`` and ``predictions`` (both id -> pair) are supplied, also
    reports the Pearson correlation between the disagreement and the
    designated prediction's true switch error, the signal that makes
    disagreement a usable outlier detector.
    """
    rows = []
    errors = []
    for ind in sorted(ensembles):
        e = ensembles[ind]
        if e.l < 2:
            raise EmptyEnsembleError(f"individual {ind!r}: outlier scoring needs l >= 2")
        rows.append((ind, ensemble_disagreement(e, spec)))
        if truths is not None and predictions is not None:
            if ind not in truths:
                raise MissingTruthError(f"no truth for individual {ind!r}")
            g = genotype_from_pair(truths[ind], ind)
            errors.append(switch_error(predictions[ind], truths[ind], het_positions(g)))
    ranking = tuple(ind for ind, _ in sorted(rows, key=lambda r: (-r[1], r[0])))
    corr = None
    if errors:
        dis = np.array([d for _, d in rows], dtype=np.float64)
        err = np.array(errors, dtype=np.float64)
        if dis.std() > 0 and err.std() > 0:
            corr = float(np.corrcoef(dis, err)[0, 1])
    return OutlierReport(tuple(rows), ranking, corr)


@dataclass(frozen=True)
class AuditRow:
    id: str
    selection_score: int
    voting_score: int
    ratio: float


@dataclass(frozen=True)
class AuditReport:
    rows: tuple
    max_ratio: float
    mean_ratio: float


def _exact_voting(e: Ensemble, spec: DistanceSpec, limits: SolverLimits) -> CombineResult:
    if spec.kind == SWITCH:
        return vote_switch(e)
    if spec.kind == KHAMMING:
        return vote_k_hamming(e, spec.k, limits=limits)
    return vote_hamming(e, limits=limits)


def approx_audit(ensembles, spec: DistanceSpec, limits: SolverLimits = SolverLimits()) -> AuditReport:
    """Check that selecting a member never costs more than twice the vote.

    For each individual, computes the selection and voting objectives and
    their ratio (0/0 counts as 1).  Both solvers share a distance obeying
    the triangle inequality, so the ratio must land in [1, 2]; a value
    outside that interval is an internal error and raises.
    """
    rows = []
    for ind in sorted(ensembles):
        e = ensembles[ind]
        sel = select_hsp(e, spec)
        vote = _exact_voting(e, spec, limits)
        # 0/0 counts as 1; a zero voting optimum with a nonzero selection
        # score would be a contradiction and falls through to the raise
        ratio = 1.0 if sel.score == vote.score == 0 else sel.score / (vote.score or float("nan"))
        if not 1.0 <= ratio <= 2.0:
            raise HapcombineError(
                f"individual {ind!r}: selection/voting ratio {ratio} outside [1, 2]"
            )
        rows.append(AuditRow(ind, sel.score, vote.score, ratio))
    ratios = [r.ratio for r in rows]
    return AuditReport(
        tuple(rows),
        max_ratio=max(ratios) if ratios else 1.0,
        mean_ratio=float(np.mean(ratios)) if ratios else 1.0,
    )
