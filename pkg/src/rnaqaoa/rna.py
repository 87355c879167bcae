"""RNA sequences, stems and their relations.

A stem is a run of consecutive base pairs (i, j), (i+1, j-1), ..., read off
the pairing matrix as an anti-diagonal run of 1s.  Stems are the binary
decision units of the folding objective: a secondary structure is a subset of
the enumerated stems.  This module knows nothing about the objective itself;
it only provides the combinatorics (enumeration, overlap, crossing, domain
partition) that the QUBO layer builds on.

All indices in the public types are 1-based, matching the usual convention
for sequence positions.  Numpy matrices are 0-based internally.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError

BASES = "ACGU"

# Watson-Crick pairs plus the G-U wobble.
_PAIRABLE = frozenset({frozenset("AU"), frozenset("CG"), frozenset("GU")})

#: Minimum number of unpaired bases between two pairing partners.  A base
#: cannot bond with its immediate neighbour, so 1 is the weakest physically
#: meaningful setting; it is also the one consistent with the stem counts of
#: the reference instances used in the test suite.
DEFAULT_MIN_LOOP = 1

#: Minimum stem length (base pairs) considered stable enough to keep.
DEFAULT_MIN_STEM = 3


def _normalize_bases(raw: str) -> str:
    bases = raw.strip().upper().replace("T", "U")
    for pos, ch in enumerate(bases, start=1):
        if ch not in BASES:
            raise InputError(f"invalid base {ch!r} at position {pos}")
    if not bases:
        raise InputError("empty sequence")
    return bases


@dataclass(frozen=True)
class Sequence:
    """A validated RNA base string.

    DNA-style input is accepted: T is silently normalized to U.  Any symbol
    outside A/C/G/U/T raises InputError naming the offending position.
    """

    bases: str
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "bases", _normalize_bases(self.bases))

    def __len__(self) -> int:
        return len(self.bases)

    def base(self, pos: int) -> str:
        """Base at 1-based position `pos`."""
        return self.bases[pos - 1]


@dataclass(frozen=True, order=True)
class Stem:
    """A run of `k` consecutive base pairs.

    `i` is the first base of the 5' run, `j` the last base of the 3' run,
    both 1-based.  The pairs are (i, j), (i+1, j-1), ..., (i+k-1, j-k+1).
    A zero-length stem (k=0, i=j=0) is the dummy placeholder used by the
    domain encoding and occupies no positions.
    """

    i: int
    j: int
    k: int

    def __post_init__(self):
        if self.k == 0:
            if (self.i, self.j) != (0, 0):
                raise ValueError("dummy stem must be Stem(0, 0, 0)")
            return
        if self.k < 0 or self.i < 1:
            raise ValueError(f"bad stem ({self.i}, {self.j}, {self.k})")
        if self.i + self.k - 1 >= self.j - self.k + 1:
            raise ValueError(f"stem runs touch or cross: ({self.i}, {self.j}, {self.k})")

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((self.i + t, self.j - t) for t in range(self.k))

    def positions(self) -> frozenset[int]:
        """All base positions occupied by the stem."""
        return frozenset(range(self.i, self.i + self.k)) | frozenset(
            range(self.j - self.k + 1, self.j + 1)
        )

    @property
    def span(self) -> tuple[int, int]:
        """Outermost pair (i, j)."""
        return (self.i, self.j)


def can_pair(a: str, b: str) -> bool:
    """True iff {a, b} is A-U, C-G or the G-U wobble."""
    return frozenset((a, b)) in _PAIRABLE


def pairing_matrix(seq: Sequence, min_loop: int = DEFAULT_MIN_LOOP) -> np.ndarray:
    """Boolean matrix of admissible base pairs.

    Entry [i-1, j-1] is True iff bases i and j can pair and are separated by
    more than `min_loop` positions.  Symmetric with a zero diagonal.
    """
    n = len(seq)
    codes = np.frombuffer(seq.bases.encode(), dtype=np.uint8)
    mat = np.zeros((n, n), dtype=bool)
    pair_codes = {tuple(sorted(map(ord, p))) for p in ("AU", "CG", "GU")}
    for a, b in itertools.combinations(range(n), 2):
        if b - a > min_loop and tuple(sorted((codes[a], codes[b]))) in pair_codes:
            mat[a, b] = mat[b, a] = True
    return mat


@dataclass(frozen=True)
class StemSet:
    """Stems of one sequence in canonical order (ascending i, then j).

    Construction validates bounds, uniqueness and that every constituent
    pair is admissible for the parent sequence.
    """

    sequence: Sequence
    stems: tuple[Stem, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.stems, key=lambda s: (s.i, s.j)))
        object.__setattr__(self, "stems", ordered)
        seen = set()
        n = len(self.sequence)
        for s in ordered:
            if s.k == 0:
                raise ValueError("dummy stems do not belong in a StemSet")
            if s in seen:
                raise ValueError(f"duplicate stem {s}")
            seen.add(s)
            if s.j > n:
                raise ValueError(f"stem {s} outside sequence of length {n}")
            for a, b in s.pairs():
                if not can_pair(self.sequence.base(a), self.sequence.base(b)):
                    raise ValueError(f"illegal pair ({a}, {b}) in stem {s}")

    def __len__(self) -> int:
        return len(self.stems)

    def __iter__(self):
        return iter(self.stems)

    def __getitem__(self, idx: int) -> Stem:
        return self.stems[idx]


def enumerate_stems(
    seq: Sequence,
    min_len: int = DEFAULT_MIN_STEM,
    maximal_only: bool = False,
    min_loop: int = DEFAULT_MIN_LOOP,
) -> StemSet:
    """All stems of length >= min_len, as anti-diagonal runs of the pairing matrix.

    By default every contiguous run of admissible pairs is reported,
    including sub-runs of longer runs.  With maximal_only=True only runs
    that cannot be extended by another pair in either direction are kept,
    which shrinks the variable count at the cost of resolution (useful to
    fit large sequences into a qubit budget).

    Each matrix cell is visited a bounded number of times, so the scan is
    quadratic in the sequence length.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    n = len(seq)
    mat = pairing_matrix(seq, min_loop)

    def hit(i: int, j: int) -> bool:
        return 1 <= i < j <= n and mat[i - 1, j - 1]

    found: list[Stem] = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if not hit(i, j) or hit(i - 1, j + 1):
                continue  # not the start of a run
            k = 0
            while hit(i + k, j - k):
                k += 1
            if maximal_only:
                if k >= min_len:
                    found.append(Stem(i, j, k))
            else:
                for a in range(k):
                    for b in range(a + min_len - 1, k):
                        found.append(Stem(i + a, j - a, b - a + 1))
    return StemSet(seq, tuple(found))


def stems_overlap(s1: Stem, s2: Stem) -> bool:
    """True iff the two stems occupy at least one common base position."""
    return bool(s1.positions() & s2.positions())


def stems_pseudoknot(s1: Stem, s2: Stem) -> bool:
    """True iff the stems' outer spans cross (non-nested interleaving).

    Overlapping stems are never reported as pseudoknots; overlap and
    crossing are mutually exclusive relations.
    """
    if s1.k == 0 or s2.k == 0 or stems_overlap(s1, s2):
        return False
    (i1, j1), (i2, j2) = s1.span, s2.span
    return (i1 < i2 < j1 < j2) or (i2 < i1 < j2 < j1)


@dataclass(frozen=True)
class Domain:
    """A maximal group of mutually overlapping stems.

    At most one member of a domain can appear in a conflict-free structure.
    `dummy_index` is the qubit index of the appended zero-length dummy stem
    that encodes "select none of this domain".
    """

    members: tuple[int, ...]
    dummy_index: int

    @property
    def size(self) -> int:
        return len(self.members)

    def ring(self) -> tuple[int, ...]:
        """Qubit ring for the excitation-preserving mixer: members then dummy."""
        return self.members + (self.dummy_index,)


def partition_domains(stems: StemSet) -> list[Domain]:
    """Greedy left-to-right partition of the stem list into domains.

    Scanning stems in canonical order, the current domain is extended while
    the next stem overlaps every stem already in it; otherwise a new domain
    starts.  Every stem lands in exactly one domain.  Dummy qubit indices
    are assigned after the stem qubits, one per domain in scan order.
    """
    groups: list[list[int]] = []
    current: list[int] = []
    for idx, stem in enumerate(stems):
        if current and not all(stems_overlap(stem, stems[m]) for m in current):
            groups.append(current)
            current = [idx]
        else:
            current.append(idx)
    if current:
        groups.append(current)
    n = len(stems)
    return [
        Domain(members=tuple(g), dummy_index=n + d) for d, g in enumerate(groups)
    ]


def structure_from_selection(
    stems: StemSet, selection
) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]:
    """Base pairs of the selected stems, plus any overlap conflicts.

    `selection` is a bitstring (or any 0/1 sequence) over the stems, dummy
    bits excluded.  Returns (pairs, conflicts) where conflicts lists the
    stem index pairs that overlap; callers decide whether to reject.
    """
    bits = [int(b) for b in selection]
    if len(bits) != len(stems):
        raise ValueError(f"selection length {len(bits)} != stem count {len(stems)}")
    chosen = [idx for idx, b in enumerate(bits) if b]
    pairs: set[tuple[int, int]] = set()
    for idx in chosen:
        pairs.update(stems[idx].pairs())
    conflicts = tuple(
        (a, b)
        for a, b in itertools.combinations(chosen, 2)
        if stems_overlap(stems[a], stems[b])
    )
    return tuple(sorted(pairs)), conflicts
