"""File formats: haplotype records, genotype tables, and report rows.

Haplotype files are UTF-8 with LF line endings: each record is a ``>ID``
line followed by the pair's two allele lines (equal length, characters
0/1); blank lines are ignored.  Genotype files are tab-separated:
``ID<TAB>tokens`` with whitespace-separated tokens in {0, 1, 2, ?}
counting alternate alleles (? = missing).  Reports are JSON lines with a
fixed key order.
"""

import json

from .core import CHAR_FROM_CALL, Genotype, HapcombineError, HaplotypePair

REPORT_FIELDS = (
    "id",
    "mode",
    "distance",
    "k",
    "score",
    "tie_count",
    "certificate",
    "solver",
    "disagreement",
    "switch_error",
)


class ParseError(HapcombineError):
    """Malformed input file; carries the path and 1-based line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class DuplicateIdError(ParseError):
    """The same individual id appears twice in one file."""


def parse_haplotype_file(path) -> dict:
    """Read ``{individual id: HaplotypePair}`` from a haplotype file."""
    pairs: dict[str, HaplotypePair] = {}
    current = None  # (id, header line)
    lines: list[tuple[int, str]] = []

    def finish():
        if current is None:
            return
        ind, at = current
        if len(lines) != 2:
            raise ParseError(path, at, f"record {ind!r} needs exactly two haplotype lines")
        (l1, h1), (l2, h2) = lines
        if set(h1) - {"0", "1"}:
            raise ParseError(path, l1, f"record {ind!r}: alleles must be 0/1")
        if set(h2) - {"0", "1"}:
            raise ParseError(path, l2, f"record {ind!r}: alleles must be 0/1")
        if len(h1) != len(h2):
            raise ParseError(
                path, l2, f"record {ind!r}: haplotype lengths differ ({len(h1)} vs {len(h2)})"
            )
        if not h1:
            raise ParseError(path, l1, f"record {ind!r}: empty haplotype")
        pairs[ind] = HaplotypePair(h1, h2)

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                finish()
                ind = line[1:].strip()
                if not ind:
                    raise ParseError(path, lineno, "empty individual id")
                if ind in pairs:
                    raise DuplicateIdError(path, lineno, f"duplicate individual id {ind!r}")
                current = (ind, lineno)
                lines = []
            else:
                if current is None:
                    raise ParseError(path, lineno, "haplotype data before any >ID header")
                if len(lines) >= 2:
                    raise ParseError(path, lineno, f"record {current[0]!r} has extra lines")
                lines.append((lineno, line))
    finish()
    return pairs


def write_haplotype_file(path, pairs) -> None:
    """Write pairs (in iteration order) in canonical orientation."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ind, pair in pairs.items():
            h1, h2 = pair.canonical()
            fh.write(f">{ind}\n")
            fh.write("".join(map(str, h1)) + "\n")
            fh.write("".join(map(str, h2)) + "\n")


def parse_genotype_file(path) -> dict:
    """Read ``{individual id: Genotype}`` from a genotype table."""
    genotypes: dict[str, Genotype] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            ind, sep, rest = line.partition("\t")
            ind = ind.strip()
            if not sep or not ind:
                raise ParseError(path, lineno, "expected ID<TAB>calls")
            if ind in genotypes:
                raise DuplicateIdError(path, lineno, f"duplicate individual id {ind!r}")
            tokens = rest.split()
            if not tokens:
                raise ParseError(path, lineno, f"record {ind!r}: no genotype calls")
            bad = [t for t in tokens if t not in ("0", "1", "2", "?")]
            if bad:
                raise ParseError(path, lineno, f"record {ind!r}: invalid call {bad[0]!r}")
            genotypes[ind] = Genotype(ind, "".join(tokens))
    return genotypes


def write_genotype_file(path, genotypes) -> None:
    """Write genotypes (in iteration order) as a tab-separated table."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ind, g in genotypes.items():
            tokens = " ".join(CHAR_FROM_CALL[int(c)] for c in g.calls)
            fh.write(f"{ind}\t{tokens}\n")


def report_line(**fields) -> str:
    """One JSON report row with the documented keys in fixed order.

    ``switch_error`` is included only when supplied; the other keys are
    always present, with ``null`` where not applicable.  Unknown keys are
    rejected to keep the schema stable.
    """
    unknown = set(fields) - set(REPORT_FIELDS)
    if unknown:
        raise ValueError(f"unknown report fields: {sorted(unknown)}")
    row = {key: fields.get(key) for key in REPORT_FIELDS if key != "switch_error"}
    if "switch_error" in fields:
        row["switch_error"] = fields["switch_error"]
    return json.dumps(row, separators=(", ", ": "))
