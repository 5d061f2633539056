"""Redundant records: one spin copied into ``N`` apparatus atoms.

Register order is ``("spin", "atom1", ..., "atomN")``; atoms are numbered
from 1 to match their register position.

Outcome labels are bits. In the pointer basis 0 = |±>, 1 = |∓> for atoms
and 0 = up, 1 = down for the spin. In the conjugate basis 0 = |+>, 1 = |->
for atoms and 0 = odot, 1 = otimes for the spin.

A flip is ``sigma_y`` in the pointer basis (``|±> -> i|∓>``,
``|∓> -> -i|±>``). It is Hermitian, squares to the identity, and anticommutes
with both ``sigma_x`` and ``sigma_z``, so it exchanges the atom's label in
either basis.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qcore import (
    DOWN,
    EXCITED,
    GROUND,
    PLUS,
    STRUCT_TOL,
    UP,
    DomainError,
    InvariantError,
    PureState,
    Register,
)
from .rng import derive_rng

POINTER = "pointer"
CONJUGATE = "conjugate"

SPIN_UP, SPIN_DOWN, TIE = "up", "down", "tie"
ODOT_LABEL, OTIMES_LABEL = "odot", "otimes"

SPIN_LABELS = {POINTER: (SPIN_UP, SPIN_DOWN), CONJUGATE: (ODOT_LABEL, OTIMES_LABEL)}

FLIP = np.array([[0.0, -1j], [1j, 0.0]])
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)

# Trials per Monte Carlo chunk; fixed so results ignore the worker count.
TRIAL_CHUNK = 4096


@dataclass(frozen=True)
class RecordState:
    n_atoms: int
    state: PureState

    def __post_init__(self) -> None:
        if self.n_atoms < 1:
            raise InvariantError("a record needs at least one atom")
        expected = record_register(self.n_atoms)
        if self.state.register != expected:
            raise InvariantError(f"record register must be {expected.labels}")


@dataclass(frozen=True)
class Outcome:
    per_atom: tuple[int, ...]
    basis_tag: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_atom", tuple(int(x) for x in self.per_atom))
        if self.basis_tag not in (POINTER, CONJUGATE):
            raise InvariantError(f"unknown basis tag {self.basis_tag!r}")
        if any(x not in (0, 1) for x in self.per_atom):
            raise InvariantError("outcome labels must be 0 or 1")


def record_register(n: int) -> Register:
    return Register.qubits("spin", *(f"atom{k}" for k in range(1, n + 1)))


def _product(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


def record_state(a: complex, b: complex, n: int) -> RecordState:
    """``a|up> |±>^N + b|down> |∓>^N``."""
    if n < 1:
        raise InvariantError("a record needs at least one atom")
    amps = a * _product([UP] + [EXCITED] * n) + b * _product([DOWN] + [GROUND] * n)
    return RecordState(n, PureState(record_register(n), amps))


def initial_record_input(a: complex, b: complex, n: int) -> PureState:
    """``(a|up> + b|down>) |+>^N`` before the copying interaction."""
    return PureState(record_register(n), _product([a * UP + b * DOWN] + [PLUS] * n))


def _apply_local(amps: np.ndarray, n_qubits: int, axis: int, gate: np.ndarray) -> np.ndarray:
    t = amps.reshape((2,) * n_qubits)
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def flip_atoms(rec: RecordState, indices: Iterable[int]) -> RecordState:
    indices = sorted(set(int(i) for i in indices))
    if any(not 1 <= i <= rec.n_atoms for i in indices):
        raise DomainError(f"atom indices must lie in 1..{rec.n_atoms}")
    amps = rec.state.amplitudes
    for i in indices:
        amps = _apply_local(amps, rec.n_atoms + 1, i, FLIP)
    return RecordState(rec.n_atoms, PureState(rec.state.register, amps))


def _check_subset(subset: Iterable[int] | None, n: int) -> list[int]:
    if subset is None:
        return list(range(1, n + 1))
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise DomainError("subset must be nonempty")
    if any(not 1 <= i <= n for i in subset):
        raise DomainError(f"subset indices must lie in 1..{n}")
    return subset


def majority_decode(outcome: Outcome, subset: Iterable[int] | None = None) -> str:
    """Up if most consulted atoms read |±>, down if most read |∓>, else tie."""
    if outcome.basis_tag != POINTER:
        raise ValueError("majority decoding needs a pointer-basis outcome")
    idx = _check_subset(subset, len(outcome.per_atom))
    ones = sum(outcome.per_atom[i - 1] for i in idx)
    zeros = len(idx) - ones
    if zeros > ones:
        return SPIN_UP
    if ones > zeros:
        return SPIN_DOWN
    return TIE


def parity_decode(outcome: Outcome, subset: Iterable[int] | None = None) -> str:
    """Even number of |-> atoms means odot, odd means otimes.

    Parity is a property of the whole record; reading a strict subset of
    the atoms is rejected.
    """
    if outcome.basis_tag != CONJUGATE:
        raise ValueError("parity decoding needs a conjugate-basis outcome")
    n = len(outcome.per_atom)
    if subset is not None and sorted(set(subset)) != list(range(1, n + 1)):
        raise ValueError("parity decoding must read every atom")
    return ODOT_LABEL if sum(outcome.per_atom) % 2 == 0 else OTIMES_LABEL


def outcome_probabilities(rec: RecordState, basis_tag: str) -> np.ndarray:
    """Born probabilities over all ``2^(N+1)`` product outcomes; spin is the top bit."""
    amps = rec.state.amplitudes
    if basis_tag == CONJUGATE:
        for axis in range(rec.n_atoms + 1):
            amps = _apply_local(amps, rec.n_atoms + 1, axis, HADAMARD)
    elif basis_tag != POINTER:
        raise InvariantError(f"unknown basis tag {basis_tag!r}")
    p = np.abs(amps) ** 2
    return p / p.sum()


def _split(index: int, n: int) -> tuple[int, tuple[int, ...]]:
    bits = tuple((index >> (n - k)) & 1 for k in range(n + 1))
    return bits[0], bits[1:]


def sample_outcomes(
    rec: RecordState, basis_tag: str, shots: int, seed: int | np.random.Generator
) -> np.ndarray:
    """``shots`` joint outcome indices drawn with Born probabilities."""
    rng = derive_rng(seed, "measure")
    p = outcome_probabilities(rec, basis_tag)
    return rng.choice(p.size, size=shots, p=p)


def measure_record(
    rec: RecordState, basis_tag: str, seed: int | np.random.Generator
) -> tuple[str, Outcome]:
    """Read the spin and every atom in the requested product basis."""
    index = int(sample_outcomes(rec, basis_tag, 1, seed)[0])
    spin_bit, atoms = _split(index, rec.n_atoms)
    return SPIN_LABELS[basis_tag][spin_bit], Outcome(atoms, basis_tag)


def _decoded_ok(spin_bit: int, atoms: tuple[int, ...], basis_tag: str) -> bool:
    out = Outcome(atoms, basis_tag)
    truth = SPIN_LABELS[basis_tag][spin_bit]
    decoded = majority_decode(out) if basis_tag == POINTER else parity_decode(out)
    return decoded == truth


def exact_success(rec: RecordState, basis_tag: str) -> float:
    """Probability that decoding the atoms reproduces the spin's reading."""
    p = outcome_probabilities(rec, basis_tag)
    total = 0.0
    for index in np.flatnonzero(p > STRUCT_TOL**2):
        spin_bit, atoms = _split(int(index), rec.n_atoms)
        if _decoded_ok(spin_bit, atoms, basis_tag):
            total += p[index]
    return float(total)


@dataclass(frozen=True)
class Reliability:
    n_atoms: int
    flip_count: int | None
    flip_rate: float | None
    majority_success: float
    parity_success: float
    trials: int
    seed: int


def reliability_exhaustive(n: int, flip_count: int, a: complex = None, b: complex = None) -> tuple[float, float]:
    """Exact success probabilities averaged over every flip set of the given size."""
    a = np.sqrt(0.5) if a is None else a
    b = np.sqrt(0.5) if b is None else b
    if not 0 <= flip_count <= n:
        raise DomainError("flip_count must lie in 0..N")
    rec = record_state(a, b, n)
    sets = list(combinations(range(1, n + 1), flip_count))
    maj = np.mean([exact_success(flip_atoms(rec, s), POINTER) for s in sets])
    par = np.mean([exact_success(flip_atoms(rec, s), CONJUGATE) for s in sets])
    return float(maj), float(par)


def _majority_ok(spin_bits: np.ndarray, atom_bits: np.ndarray) -> np.ndarray:
    n = atom_bits.shape[1]
    ones = atom_bits.sum(axis=1)
    decoded = np.where(2 * ones < n, 0, np.where(2 * ones > n, 1, -1))
    return decoded == spin_bits


def _parity_ok(spin_bits: np.ndarray, atom_bits: np.ndarray) -> np.ndarray:
    return (atom_bits.sum(axis=1) % 2) == spin_bits


def reliability_curve(
    n: int,
    flip_count: int | None = None,
    trials: int = 10_000,
    seed: int = 0,
    *,
    flip_rate: float | None = None,
    a: complex | None = None,
    b: complex | None = None,
    workers: int = 1,
) -> Reliability:
    """Monte Carlo success rates of majority and parity decoding after flips.

    Each trial flips either a uniformly random set of ``flip_count`` atoms
    or each atom independently with probability ``flip_rate``, then reads
    the record once in the pointer basis and once in the conjugate basis.
    A flip maps every product outcome of either basis to the outcome with
    the flipped atoms' bits inverted (up to phase), so a trial is drawn from
    the unperturbed Born distribution and its bits are XORed with the flip
    mask. Ties count as majority failures.
    """
    if (flip_count is None) == (flip_rate is None):
        raise ValueError("give exactly one of flip_count and flip_rate")
    if flip_count is not None and not 0 <= flip_count <= n:
        raise DomainError("flip_count must lie in 0..N")
    if flip_rate is not None and not 0.0 <= flip_rate <= 1.0:
        raise DomainError("flip_rate must lie in [0, 1]")
    a = np.sqrt(0.5) if a is None else a
    b = np.sqrt(0.5) if b is None else b
    rec = record_state(a, b, n)
    probs = {tag: outcome_probabilities(rec, tag) for tag in (POINTER, CONJUGATE)}
    shifts = np.arange(n, -1, -1)
    bounds = [(i, min(i + TRIAL_CHUNK, trials)) for i in range(0, trials, TRIAL_CHUNK)]

    def run(idx: int) -> tuple[int, int]:
        lo, hi = bounds[idx]
        m = hi - lo
        rng = derive_rng(seed, f"reliability/{n}", idx)
        if flip_count is not None:
            order = np.argsort(rng.random((m, n)), axis=1)
            mask = np.zeros((m, n), dtype=np.int64)
            np.put_along_axis(mask, order[:, :flip_count], 1, axis=1)
        else:
            mask = (rng.random((m, n)) < flip_rate).astype(np.int64)
        counts = []
        for tag, check in ((POINTER, _majority_ok), (CONJUGATE, _parity_ok)):
            idxs = rng.choice(probs[tag].size, size=m, p=probs[tag])
            bits = (idxs[:, None] >> shifts) & 1
            counts.append(int(check(bits[:, 0], bits[:, 1:] ^ mask).sum()))
        return counts[0], counts[1]

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(len(bounds))))
    else:
        results = [run(i) for i in range(len(bounds))]
    maj = sum(r[0] for r in results)
    par = sum(r[1] for r in results)
    return Reliability(n, flip_count, flip_rate, maj / trials, par / trials, trials, int(seed))


def write_reliability_csv(path: str | Path, rows: Sequence[Reliability]) -> None:
    rate_mode = any(r.flip_rate is not None for r in rows)
    second = "flip_rate" if rate_mode else "flip_count"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_atoms", second, "majority_success", "parity_success", "trials", "seed"])
        for r in rows:
            flips = format(r.flip_rate, ".17g") if rate_mode else r.flip_count
            w.writerow([
                r.n_atoms,
                flips,
                format(r.majority_success, ".17g"),
                format(r.parity_success, ".17g"),
                r.trials,
                r.seed,
            ])
