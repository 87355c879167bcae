"""Stem-selection objective, its Ising form, and the exhaustive oracle.

The objective rewards selected base pairs (2k per stem of length k), charges
each stem a density penalty N_seq/(2k + epsilon), and couples stem pairs
through a relation penalty: -(k_i + k_j) for overlapping stems,
c_p*(k_i + k_j) for crossing (pseudoknotted) stems, 0 otherwise.  Higher is
better.  The Ising Hamiltonian is the same polynomial with x -> (1 - z)/2
and an overall sign flip, so its ground state is the objective's argmax:
ising_energy(x) == -objective(x) for every bitstring.

Spin convention, fixed once and asserted in tests: bit b maps to z = 1 - 2b,
i.e. a selected stem (bit 1) has z = -1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .rna import Domain, Stem, StemSet, stems_overlap, stems_pseudoknot

#: Hard cap for exhaustive enumeration and dense simulation alike.
MAX_QUBITS = 24

#: Absolute tolerance used to detect degenerate optima.
DEGENERACY_ATOL = 1e-9


@dataclass(frozen=True)
class QuboParams:
    """Hyperparameters of the objective.

    epsilon is the averaged number of free bases per stem slot; it tunes how
    strongly short stems are discouraged (one length-6 stem beats two
    length-3 stems for any positive epsilon).  c_p weighs crossing stem
    pairs: 0 keeps nested and pseudoknotted alternatives degenerate.
    """

    epsilon: float = 6.0
    c_p: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if abs(self.c_p) > 1:
            raise ValueError("c_p must lie in [-1, 1]")


@dataclass(frozen=True)
class QuboModel:
    """Coefficients of the selection objective.

    linear[i] multiplies x_i; quadratic[(i, j)] with j < i multiplies
    x_i * x_j; offset is added unconditionally.
    """

    n: int
    linear: tuple[float, ...]
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if len(self.linear) != self.n:
            raise ValueError("linear length mismatch")
        for (i, j), v in self.quadratic.items():
            if not (0 <= j < i < self.n):
                raise ValueError(f"quadratic key ({i}, {j}) must have j < i < n")
            if not np.isfinite(v):
                raise ValueError(f"non-finite coefficient at ({i}, {j})")

    def evaluate(self, bits) -> float:
        x = [int(b) for b in bits]
        if len(x) != self.n:
            raise ValueError(f"bitstring length {len(x)} != {self.n}")
        val = self.offset + sum(l * b for l, b in zip(self.linear, x))
        for (i, j), v in self.quadratic.items():
            val += v * x[i] * x[j]
        return val


@dataclass(frozen=True)
class IsingModel:
    """Diagonal Hamiltonian: constant + sum h_i Z_i + sum J_ij Z_i Z_j.

    J is stored upper-triangular (keys (i, j) with i < j).  Qubits beyond
    the stem variables (domain dummies) carry zero coefficients.
    """

    n: int
    h: tuple[float, ...]
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self):
        if len(self.h) != self.n:
            raise ValueError("h length mismatch")
        for i, j in self.J:
            if not (0 <= i < j < self.n):
                raise ValueError(f"J key ({i}, {j}) must be upper-triangular")


def penalty(s1: Stem, s2: Stem, params: QuboParams) -> float:
    """Pairwise coupling: overlap is penalized, crossing is weighed by c_p."""
    if stems_overlap(s1, s2):
        return -(s1.k + s2.k)
    if stems_pseudoknot(s1, s2):
        return params.c_p * (s1.k + s2.k)
    return 0.0


def objective(selection, stems: StemSet, params: QuboParams) -> float:
    """Direct evaluation of the objective for one selection bitstring.

    Kept as straightforward sums over stems so it can serve as an
    independent check on the coefficient-based model.
    """
    bits = [int(b) for b in selection]
    if len(bits) != len(stems):
        raise ValueError(f"selection length {len(bits)} != stem count {len(stems)}")
    n_seq = len(stems.sequence)
    total = 0.0
    for bit, stem in zip(bits, stems):
        if bit:
            total += 2.0 * stem.k - n_seq / (2.0 * stem.k + params.epsilon)
    for (a, sa), (b, sb) in itertools.combinations(enumerate(stems), 2):
        if bits[a] and bits[b]:
            total += penalty(sa, sb, params)
    return total


def build_qubo(stems: StemSet, params: QuboParams = QuboParams()) -> QuboModel:
    """Assemble objective coefficients for a stem set."""
    n_seq = len(stems.sequence)
    linear = tuple(
        2.0 * s.k - n_seq / (2.0 * s.k + params.epsilon) for s in stems
    )
    quadratic: dict[tuple[int, int], float] = {}
    for j, i in itertools.combinations(range(len(stems)), 2):
        k = penalty(stems[i], stems[j], params)
        if k != 0.0:
            quadratic[(i, j)] = k
    return QuboModel(n=len(stems), linear=linear, quadratic=quadratic)


def to_ising(model: QuboModel, domains: list[Domain] | None = None) -> IsingModel:
    """Map the maximization objective to its cost Hamiltonian.

    Substitutes x_i -> (1 - Z_i)/2 and negates, so the ground state is the
    objective's argmax.  When `domains` is given (the excitation-preserving
    encoding), couplings between stems of the same domain are dropped
    entirely: those selections are excluded from the mixer's search space,
    so their penalty terms are redundant; and one zero-coefficient dummy
    qubit per domain is appended.
    """
    same_domain: set[tuple[int, int]] = set()
    if domains is not None:
        for dom in domains:
            same_domain.update(itertools.combinations(sorted(dom.members), 2))
    n_total = model.n + (len(domains) if domains is not None else 0)
    h = np.zeros(n_total)
    J: dict[tuple[int, int], float] = {}
    constant = -model.offset
    for i, lin in enumerate(model.linear):
        constant -= lin / 2.0
        h[i] += lin / 2.0
    for (i, j), k in model.quadratic.items():  # j < i
        if (j, i) in same_domain:
            continue
        constant -= k / 4.0
        h[i] += k / 4.0
        h[j] += k / 4.0
        J[(j, i)] = -k / 4.0
    return IsingModel(n=n_total, h=tuple(h), J=J, constant=constant)


def ising_energy(ising: IsingModel, bits) -> float:
    """Energy of one basis state, bit b on qubit i contributing z_i = 1 - 2b."""
    x = [int(b) for b in bits]
    if len(x) != ising.n:
        raise ValueError(f"bitstring length {len(x)} != {ising.n}")
    z = [1 - 2 * b for b in x]
    e = ising.constant + sum(hi * zi for hi, zi in zip(ising.h, z))
    for (i, j), jij in ising.J.items():
        e += jij * z[i] * z[j]
    return e


def _guard(n: int):
    if n > MAX_QUBITS:
        raise ResourceLimitError(
            f"{n} binary variables exceed the exhaustive/dense limit of {MAX_QUBITS}"
        )


def ising_diagonal(ising: IsingModel) -> np.ndarray:
    """Energies of all 2^n basis states, index bit (n-1-i) holding qubit i.

    Equivalently: basis index int(bitstring, 2) with bitstring[i] = qubit i.
    """
    _guard(ising.n)
    n = ising.n
    diag = np.full([2] * n if n else [1], ising.constant, dtype=float)
    if n == 0:
        return diag.reshape(-1)
    z_slices = [
        (tuple(np.s_[0] if ax == q else np.s_[:] for ax in range(n)),
         tuple(np.s_[1] if ax == q else np.s_[:] for ax in range(n)))
        for q in range(n)
    ]
    for q, hq in enumerate(ising.h):
        if hq:
            diag[z_slices[q][0]] += hq
            diag[z_slices[q][1]] -= hq
    for (i, j), jij in ising.J.items():
        if jij:
            for bi, bj in itertools.product((0, 1), repeat=2):
                sel = tuple(
                    np.s_[bi] if ax == i else (np.s_[bj] if ax == j else np.s_[:])
                    for ax in range(n)
                )
                diag[sel] += jij if bi == bj else -jij
    return diag.reshape(-1)


def qubo_diagonal(model: QuboModel) -> np.ndarray:
    """Objective values of all 2^n bitstrings, same index convention as above."""
    _guard(model.n)
    n = model.n
    vals = np.full([2] * n if n else [1], model.offset, dtype=float)
    if n == 0:
        return vals.reshape(-1)
    for q, lin in enumerate(model.linear):
        if lin:
            sel = tuple(np.s_[1] if ax == q else np.s_[:] for ax in range(n))
            vals[sel] += lin
    for (i, j), k in model.quadratic.items():
        if k:
            sel = tuple(
                np.s_[1] if ax in (i, j) else np.s_[:] for ax in range(n)
            )
            vals[sel] += k
    return vals.reshape(-1)


def brute_force_solve(
    model: QuboModel, atol: float = DEGENERACY_ATOL
) -> tuple[tuple[str, ...], float]:
    """Exhaustive argmax of the objective.

    Returns every bitstring within `atol` of the best value (all degenerate
    optima, lexicographically sorted) and the best value itself.  Guarded to
    n <= 24 variables.
    """
    _guard(model.n)
    if model.n == 0:
        return ("",), float(model.offset)
    vals = qubo_diagonal(model)
    best = float(vals.max())
    winners = np.flatnonzero(vals >= best - atol)
    strings = tuple(format(int(idx), f"0{model.n}b") for idx in winners)
    return strings, best


def model_to_dict(model: QuboModel, labels: list[str] | None = None) -> dict:
    """JSON-friendly export of the model coefficients and qubit labels."""
    if labels is None:
        labels = [f"x{i}" for i in range(model.n)]
    if len(labels) != model.n:
        raise ValueError("label count mismatch")
    return {
        "n": model.n,
        "variables": list(labels),
        "linear": list(model.linear),
        "quadratic": [
            {"i": i, "j": j, "value": v}
            for (i, j), v in sorted(model.quadratic.items())
        ],
        "offset": model.offset,
    }


def stem_labels(stems: StemSet) -> list[str]:
    return [f"stem_{s.i}_{s.j}_{s.k}" for s in stems]
