"""Benchmark instances: structured generators and the curated in-repo set.

Two generators are available.  `generate_instances` rejection-samples
uniform random sequences; it produces instances with dense near-degenerate
spectra, useful for stress tests.  `generate_structured_instances` plants
complementary stem runs into an inert A/C filler, which is how benchmark
RNA looks in practice: one well-separated native structure.  The curated
suite under data/benchmark.fasta comes from the structured generator (via
scripts/make_benchmark.py, fixed seed) and is enumerated with the
maximal-stem reduction so every instance fits the 12-qubit budget under
both mixer encodings.
"""

from __future__ import annotations

from importlib.resources import files

import numpy as np

from .qubo import QuboParams, brute_force_solve, build_qubo
from .rna import (
    DEFAULT_MIN_LOOP,
    DEFAULT_MIN_STEM,
    Sequence,
    StemSet,
    enumerate_stems,
    partition_domains,
)

SMALL_PREFIX = "small"

_COMPLEMENT = {"A": "U", "U": "A", "C": "G", "G": "C"}


def random_sequence(rng: np.random.Generator, length: int, id: str = "") -> Sequence:
    return Sequence("".join(rng.choice(list("ACGU"), size=length)), id=id)


def structured_sequence(
    rng: np.random.Generator,
    length_range: tuple[int, int] = (20, 34),
    planted_stems: tuple[int, int] = (2, 3),
    stem_lengths: tuple[int, int] = (3, 5),
    id: str = "",
) -> Sequence:
    """Plant complementary runs into an A/C filler that cannot pair with itself."""
    length = int(rng.integers(length_range[0], length_range[1] + 1))
    bases: list[str | None] = [None] * length
    target = int(rng.integers(planted_stems[0], planted_stems[1] + 1))
    placed = 0
    for _ in range(60):
        if placed >= target:
            break
        k = int(rng.integers(stem_lengths[0], stem_lengths[1] + 1))
        if length - 2 * k - 3 < 2:
            continue
        i = int(rng.integers(1, length - 2 * k - 3))
        j = int(rng.integers(i + 2 * k + 3, length + 1))
        span = set(range(i, i + k)) | set(range(j - k + 1, j + 1))
        if any(bases[p - 1] is not None for p in span):
            continue
        for t in range(k):
            five = "ACGU"[rng.integers(4)]
            bases[i + t - 1] = five
            bases[j - t - 1] = _COMPLEMENT[five]
        placed += 1
    for p in range(length):
        if bases[p] is None:
            bases[p] = "AC"[rng.integers(2)]
    return Sequence("".join(bases), id=id)


def _fits_budget(stems: StemSet, min_stems: int, max_stems: int, max_qubits: int) -> bool:
    if not min_stems <= len(stems) <= max_stems:
        return False
    return len(stems) + len(partition_domains(stems)) <= max_qubits


def generate_instances(
    count: int,
    seed: int,
    min_stems: int = 3,
    max_stems: int = 8,
    max_qubits: int = 12,
    length_range: tuple[int, int] = (14, 30),
    min_len: int = DEFAULT_MIN_STEM,
    min_loop: int = DEFAULT_MIN_LOOP,
    maximal_only: bool = False,
    id_prefix: str = "rand",
) -> list[StemSet]:
    """Rejection-sample uniform random sequences within the solver budget."""
    rng = np.random.default_rng(seed)
    out: list[StemSet] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100000:
            raise RuntimeError("instance generation is not converging; relax the filter")
        length = int(rng.integers(length_range[0], length_range[1] + 1))
        seq = random_sequence(rng, length, id=f"{id_prefix}_{len(out):03d}")
        stems = enumerate_stems(seq, min_len=min_len, maximal_only=maximal_only, min_loop=min_loop)
        if _fits_budget(stems, min_stems, max_stems, max_qubits):
            out.append(stems)
    return out


def generate_structured_instances(
    count: int,
    seed: int,
    min_stems: int = 3,
    max_stems: int = 7,
    max_qubits: int = 12,
    length_range: tuple[int, int] = (20, 34),
    planted_stems: tuple[int, int] = (2, 3),
    unique_optimum: bool = True,
    id_prefix: str = "bench",
) -> list[StemSet]:
    """Planted-structure instances, enumerated with the maximal-stem reduction.

    With unique_optimum the objective's argmax must be a single non-empty
    selection, mirroring benchmark databases where each record has one
    well-defined native structure.
    """
    rng = np.random.default_rng(seed)
    out: list[StemSet] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100000:
            raise RuntimeError("instance generation is not converging; relax the filter")
        seq = structured_sequence(
            rng, length_range=length_range, planted_stems=planted_stems,
            id=f"{id_prefix}_{len(out):03d}",
        )
        stems = enumerate_stems(seq, maximal_only=True)
        if not _fits_budget(stems, min_stems, max_stems, max_qubits):
            continue
        if unique_optimum:
            strings, _ = brute_force_solve(build_qubo(stems, QuboParams()))
            if len(strings) != 1 or strings[0].count("1") < 1:
                continue
        out.append(stems)
    return out


def load_benchmark(subset: str = "suite") -> list[StemSet]:
    """Curated suite shipped with the package, maximal-stem enumeration.

    subset: "suite" (all 25 solver instances), "small" (the five 3-4 stem
    instances) or "regular" (the remaining twenty).  Reference sequences in
    the same file (PKB092) are outside the solver budget and excluded here;
    fetch them with load_sequences().
    """
    keep = {
        "suite": lambda sid: sid.startswith((SMALL_PREFIX, "bench")),
        "small": lambda sid: sid.startswith(SMALL_PREFIX),
        "regular": lambda sid: sid.startswith("bench"),
    }.get(subset)
    if keep is None:
        raise ValueError(f"unknown subset {subset!r}")
    return [
        enumerate_stems(s, maximal_only=True) for s in load_sequences() if keep(s.id)
    ]


def load_sequences() -> list[Sequence]:
    """Every record of the packaged benchmark FASTA, references included."""
    from .io import parse_fasta_text  # local import to avoid a cycle

    text = files("rnaqaoa").joinpath("data/benchmark.fasta").read_text()
    return parse_fasta_text(text)
