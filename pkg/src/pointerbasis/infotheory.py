"""Information bookkeeping for states of a partitioned register.

Information of a density matrix on a ``d``-dimensional space is

    I(rho) = ln d - S(rho),    S(rho) = -Tr rho ln rho,

in nats. A pure state therefore carries ``ln d`` and a maximally mixed one
carries nothing. The per-block informations sum to the aggregate
(negentropy); what remains of the total is the correlation information.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qcore import (
    STRUCT_TOL,
    DensityMatrix,
    DomainError,
    HermitianOperator,
    InvariantError,
    Partition,
    PureState,
    evolve_exact,
    partial_trace,
)

# Eigenvalues below this count as exact zeros (0 ln 0 = 0).
ZERO_EIGENVALUE = 1e-14


def _as_density(obj: PureState | DensityMatrix) -> DensityMatrix:
    return obj.density() if isinstance(obj, PureState) else obj


def von_neumann_entropy(rho: PureState | DensityMatrix) -> float:
    if isinstance(rho, PureState):
        return 0.0
    p = rho.eigenvalues
    p = p[p > ZERO_EIGENVALUE]
    return float(-np.sum(p * np.log(p)))


def info_total(rho: PureState | DensityMatrix) -> float:
    """``ln d - S(rho)``."""
    return float(np.log(rho.register.dim)) - von_neumann_entropy(rho)


@dataclass(frozen=True)
class InfoReport:
    total: float
    per_block: tuple[float, ...]
    aggregate: float
    correlation: float
    partition: Partition


def info_report(state: PureState | DensityMatrix, partition: Partition) -> InfoReport:
    partition.validate(state.register)
    total = info_total(state)
    blocks = tuple(info_total(partial_trace(state, block)) for block in partition.blocks)
    aggregate = float(sum(blocks))
    return InfoReport(total, blocks, aggregate, total - aggregate, partition)


def evolve_density(h: HermitianOperator, t: float, rho: DensityMatrix) -> DensityMatrix:
    """``U rho U^dagger`` with ``U = exp(-i h t)``."""
    if h.register != rho.register:
        raise DomainError("register mismatch")
    evals, evecs = h.spectrum
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    m = u @ rho.matrix @ u.conj().T
    return DensityMatrix(rho.register, 0.5 * (m + m.conj().T))


def info_conservation_check(
    h: HermitianOperator, psi0: PureState | DensityMatrix, t_samples: Iterable[float]
) -> float:
    """Largest drift of the total information along a unitary trajectory."""
    ref = info_total(_as_density(psi0))
    worst = 0.0
    for t in t_samples:
        if isinstance(psi0, PureState):
            rho_t = evolve_exact(h, t, psi0).density()
        else:
            rho_t = evolve_density(h, t, psi0)
        worst = max(worst, abs(info_total(rho_t) - ref))
    return worst


@dataclass(frozen=True)
class Preparation:
    """A weighted list of pure states that a preparer mixes together."""

    components: tuple[tuple[float, PureState], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), s) for w, s in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InvariantError("preparation needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > STRUCT_TOL:
            raise InvariantError("weights must be nonnegative and sum to 1")
        reg = comps[0][1].register
        if any(s.register != reg for _, s in comps):
            raise InvariantError("all components must share a register")


def ensemble_density(prep: Preparation) -> DensityMatrix:
    reg = prep.components[0][1].register
    m = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in prep.components)
    return DensityMatrix(reg, m)


def write_info_csv(path: str | Path, times: Sequence[float], reports: Sequence[InfoReport]) -> None:
    n_blocks = len(reports[0].per_block) if reports else 0
    header = ["t", "I_total"] + [f"I_block_{i}" for i in range(1, n_blocks + 1)]
    header += ["I_aggregate", "I_corr"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, rep in zip(times, reports):
            row = [t, rep.total, *rep.per_block, rep.aggregate, rep.correlation]
            w.writerow([format(float(x), ".17g") for x in row])
