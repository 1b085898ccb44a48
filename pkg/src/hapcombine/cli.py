"""Batch command line: combine, evaluate, outliers, audit, and simulate.

Individuals are processed independently, so the combine pipeline
parallelizes over them; report rows and output files are emitted in
sorted id order regardless of thread count, and random tie-breaking
derives one stream per (seed, individual index), which together make
output bytes independent of scheduling.

Exit codes: 0 success, 1 internal error, 2 validation or input failure.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .combine import SolverLimits, TiePolicy, combine
from .core import HapcombineError, build_ensemble
from .distance import KHAMMING, DistanceSpec
from .evaluate import (
    approx_audit,
    ensemble_disagreement,
    outlier_scores,
    total_error,
)
from .io import (
    parse_genotype_file,
    parse_haplotype_file,
    report_line,
    write_genotype_file,
    write_haplotype_file,
)
from .simulate import NoiseSpec, SimConfig, simulate_individual

THREADS_ENV = "HAPCOMBINE_THREADS"


@dataclass
class RunConfig:
    """Everything one batch invocation needs; built by the argument parser."""

    mode: str  # combine | evaluate | outliers | audit | simulate
    inputs: list = field(default_factory=list)
    genotypes_path: str | None = None
    combine_mode: str = "vote"  # vote | select
    spec: DistanceSpec | None = None
    tie_rule: str = "lex"
    seed: int = 0
    limits: SolverLimits = field(default_factory=SolverLimits)
    policy: str = "strict"
    fail_on_missing: bool = False
    threads: int | None = None
    out_dir: str | None = None
    pred_path: str | None = None
    truth_path: str | None = None
    sim: SimConfig | None = None
    noise: NoiseSpec | None = None
    n_individuals: int = 1

    def resolved_threads(self) -> int:
        if self.threads:
            return self.threads
        env = os.environ.get(THREADS_ENV)
        return max(1, int(env)) if env else 1


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _load_inputs(config: RunConfig):
    """Parse the input haplotype files; labels come from the file names."""
    labels = [Path(p).stem for p in config.inputs]
    maps = [parse_haplotype_file(p) for p in config.inputs]
    return labels, maps


def _assemble_ids(maps, labels, config: RunConfig):
    """Individual ids to process, honoring the strict/lenient policy."""
    all_ids = sorted(set().union(*[set(m) for m in maps]))
    shared = [i for i in all_ids if all(i in m for m in maps)]
    partial = [i for i in all_ids if i not in set(shared)]
    for ind in partial:
        missing_from = [lab for lab, m in zip(labels, maps) if ind not in m]
        _warn(f"individual {ind!r} absent from inputs: {', '.join(missing_from)}")
    if partial and config.fail_on_missing:
        raise HapcombineError(f"{len(partial)} individuals missing from some inputs")
    return all_ids if config.policy == "lenient" else shared


def _build_ensembles(config: RunConfig):
    labels, maps = _load_inputs(config)
    genotypes = parse_genotype_file(config.genotypes_path) if config.genotypes_path else None
    ids = _assemble_ids(maps, labels, config)
    ensembles = {}
    for ind in ids:
        members, used = [], []
        for lab, m in zip(labels, maps):
            if ind in m:
                members.append(m[ind])
                used.append(lab)
        g = None
        if genotypes is not None:
            g = genotypes.get(ind)
            if g is None:
                if config.policy == "strict":
                    raise HapcombineError(f"individual {ind!r} missing from genotype file")
                _warn(f"individual {ind!r} missing from genotype file; inferring")
        ensembles[ind] = build_ensemble(members, genotype=g, labels=used, policy=config.policy)
    return ensembles


def _run_combine(config: RunConfig) -> int:
    ensembles = _build_ensembles(config)
    ids = sorted(ensembles)
    ties = TiePolicy(config.tie_rule, config.seed)

    def work(item):
        index, ind = item
        e = ensembles[ind]
        result = combine(e, config.combine_mode, config.spec, ties, config.limits, index)
        disagreement = ensemble_disagreement(e, config.spec)
        return ind, result, disagreement

    threads = config.resolved_threads()
    items = list(enumerate(ids))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(it) for it in items]

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    consensus = {ind: res.pair for ind, res, _ in results}
    write_haplotype_file(out / "consensus.hap", consensus)
    with open(out / "report.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for ind, res, dis in results:
            fh.write(
                report_line(
                    id=ind,
                    mode=config.combine_mode,
                    distance=config.spec.kind,
                    k=config.spec.k,
                    score=res.score,
                    tie_count=res.tie_count,
                    certificate=res.certificate,
                    solver=res.solver,
                    disagreement=dis,
                )
                + "\n"
            )
    return 0


def _run_evaluate(config: RunConfig) -> int:
    preds = parse_haplotype_file(config.pred_path)
    truths = parse_haplotype_file(config.truth_path)
    genotypes = parse_genotype_file(config.genotypes_path) if config.genotypes_path else None
    report = total_error(preds, truths, genotypes)
    for row in report.rows:
        print(
            report_line(
                id=row.id,
                mode="evaluate",
                distance="switch",
                switch_error=row.switch_error,
            )
        )
    print(f"total switch error: {report.total_switch_error}", file=sys.stderr)
    return 0


def _run_outliers(config: RunConfig) -> int:
    ensembles = _build_ensembles(config)
    report = outlier_scores(ensembles, config.spec)
    for ind, dis in report.rows:
        print(
            report_line(
                id=ind,
                mode="outliers",
                distance=config.spec.kind,
                k=config.spec.k,
                disagreement=dis,
            )
        )
    print(
        "ranking (most suspect first): " + ", ".join(report.ranking),
        file=sys.stderr,
    )
    return 0


def _run_audit(config: RunConfig) -> int:
    ensembles = _build_ensembles(config)
    report = approx_audit(ensembles, config.spec, config.limits)
    for row in report.rows:
        print(
            f'{{"id": "{row.id}", "mode": "audit", "distance": "{config.spec.kind}", '
            f'"k": {config.spec.k if config.spec.k is not None else "null"}, '
            f'"selection_score": {row.selection_score}, '
            f'"voting_score": {row.voting_score}, "ratio": {row.ratio:.6g}}}'
        )
    print(
        f"ratio max {report.max_ratio:.6g}, mean {report.mean_ratio:.6g}",
        file=sys.stderr,
    )
    return 0


def _run_simulate(config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(config.n_individuals)))
    genotypes, truths = {}, {}
    member_maps = [dict() for _ in range(config.sim.l)]
    for i in range(config.n_individuals):
        ind = f"sim_{i + 1:0{width}d}"
        rng = np.random.default_rng([config.sim.seed, i])
        g, truth, members = simulate_individual(config.sim, config.noise, rng, ind)
        genotypes[ind] = g
        truths[ind] = truth
        for j, p in enumerate(members):
            member_maps[j][ind] = p
    write_genotype_file(out / "genotypes.tsv", genotypes)
    write_haplotype_file(out / "truth.hap", truths)
    for j, m in enumerate(member_maps):
        write_haplotype_file(out / f"member_{j + 1:02d}.hap", m)
    return 0


def run(config: RunConfig) -> int:
    """Execute one batch invocation; returns the process exit code."""
    runner = {
        "combine": _run_combine,
        "evaluate": _run_evaluate,
        "outliers": _run_outliers,
        "audit": _run_audit,
        "simulate": _run_simulate,
    }[config.mode]
    return runner(config)


def _add_distance_args(p, required=True):
    p.add_argument(
        "--distance", choices=["switch", "hamming", "khamming"], required=required
    )
    p.add_argument("--k", type=int, default=None, help="window length for khamming")


def _add_common_args(p):
    p.add_argument("--genotypes", default=None, help="genotype table to validate against")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--strict", action="store_true", default=True)
    group.add_argument("--lenient", dest="strict", action="store_false")


def _spec_from_args(args) -> DistanceSpec:
    if args.distance == "khamming":
        if args.k is None:
            raise HapcombineError("khamming distance requires --k")
        return DistanceSpec(KHAMMING, args.k)
    if args.k is not None:
        raise HapcombineError(f"--k applies only to khamming, not {args.distance}")
    return DistanceSpec(args.distance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapcombine",
        description="Combine haplotype reconstructions from several phasing tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("combine", help="build a consensus reconstruction per individual")
    p.add_argument("--mode", choices=["vote", "select"], required=True)
    _add_distance_args(p)
    p.add_argument("--inputs", nargs="+", required=True, help="one haplotype file per method")
    _add_common_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tie-break", choices=["lex", "first", "random"], default="lex")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fail-on-missing", action="store_true")
    p.add_argument("--l-max", type=int, default=20)
    p.add_argument("--mprime-max", type=int, default=20)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("evaluate", help="switch error of predictions against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--genotypes", default=None)

    p = sub.add_parser("outliers", help="rank individuals by member disagreement")
    p.add_argument("--inputs", nargs="+", required=True)
    _add_distance_args(p)
    _add_common_args(p)

    p = sub.add_parser("audit", help="selection vs voting objective ratios")
    p.add_argument("--inputs", nargs="+", required=True)
    _add_distance_args(p)
    _add_common_args(p)
    p.add_argument("--l-max", type=int, default=20)
    p.add_argument("--mprime-max", type=int, default=20)

    p = sub.add_parser("simulate", help="write a synthetic truth and noisy ensembles")
    p.add_argument("--m", type=int, required=True, help="markers per individual")
    p.add_argument("--het-frac", type=float, default=0.322)
    p.add_argument("--l", type=int, required=True, help="reconstructions per individual")
    p.add_argument("--noise", required=True, help="switch:RATE or allele:RATE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1, help="number of individuals")
    p.add_argument("--out", required=True)

    return parser


def config_from_args(args) -> RunConfig:
    if args.command == "combine":
        return RunConfig(
            mode="combine",
            inputs=args.inputs,
            genotypes_path=args.genotypes,
            combine_mode=args.mode,
            spec=_spec_from_args(args),
            tie_rule=args.tie_break,
            seed=args.seed,
            limits=SolverLimits(args.l_max, args.mprime_max),
            policy="strict" if args.strict else "lenient",
            fail_on_missing=args.fail_on_missing,
            threads=args.threads,
            out_dir=args.out,
        )
    if args.command == "evaluate":
        return RunConfig(
            mode="evaluate",
            pred_path=args.pred,
            truth_path=args.truth,
            genotypes_path=args.genotypes,
        )
    if args.command in ("outliers", "audit"):
        limits = (
            SolverLimits(args.l_max, args.mprime_max)
            if args.command == "audit"
            else SolverLimits()
        )
        return RunConfig(
            mode=args.command,
            inputs=args.inputs,
            genotypes_path=args.genotypes,
            spec=_spec_from_args(args),
            policy="strict" if args.strict else "lenient",
            limits=limits,
        )
    return RunConfig(
        mode="simulate",
        sim=SimConfig(m=args.m, het_fraction=args.het_frac, l=args.l, seed=args.seed),
        noise=NoiseSpec.parse(args.noise),
        n_individuals=args.n,
        out_dir=args.out,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(config_from_args(args))
    except HapcombineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
