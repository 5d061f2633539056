"""Finite-dimensional quantum kinematics on labelled registers of qubits.

Amplitude ordering is big-endian over the register: the first subsystem is
the most significant digit of the basis index. ``hbar = 1`` throughout.

Everything in here is exact dense linear algebra. The closed-form models in
:mod:`pointerbasis.bitmodel` and :mod:`pointerbasis.envselect` are checked
against :func:`evolve_exact`, so this module must not import from them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

# Tolerances: structural invariants, oracle comparisons, rank/boolean decisions.
STRUCT_TOL = 1e-12
ORACLE_TOL = 1e-10
DECISION_TOL = 1e-10

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Spin basis, index 0 = up, 1 = down.
UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)
ODOT = (UP + DOWN) * SQRT_HALF
OTIMES = (UP - DOWN) * SQRT_HALF
RIGHT = (UP + 1j * DOWN) * SQRT_HALF
LEFT = (UP - 1j * DOWN) * SQRT_HALF

# Atom basis, index 0 = excited |±>, 1 = ground |∓>.
EXCITED = np.array([1.0, 0.0], dtype=complex)
GROUND = np.array([0.0, 1.0], dtype=complex)
PLUS = (EXCITED + GROUND) * SQRT_HALF
MINUS = (EXCITED - GROUND) * SQRT_HALF
TOP = (EXCITED + 1j * GROUND) * SQRT_HALF
BOT = (EXCITED - 1j * GROUND) * SQRT_HALF

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class LabelCollisionError(ValueError):
    """Two registers being combined share a subsystem label."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class InvariantError(ValueError):
    """A value violates the invariants of its type."""


@dataclass(frozen=True)
class Register:
    """Ordered, uniquely labelled list of finite-dimensional subsystems."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.labels) != len(self.dims):
            raise InvariantError("labels and dims differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise LabelCollisionError(f"duplicate labels in {self.labels}")
        if any(d < 2 for d in self.dims):
            raise InvariantError("subsystem dimensions must be >= 2")

    @classmethod
    def qubits(cls, *labels: str) -> "Register":
        return cls(tuple(labels), (2,) * len(labels))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown subsystem label {label!r}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def sub(self, labels: Iterable[str]) -> "Register":
        """Sub-register holding ``labels`` in this register's order."""
        wanted = set(labels)
        missing = wanted - set(self.labels)
        if missing:
            raise DomainError(f"unknown subsystem labels {sorted(missing)}")
        keep = [i for i, lab in enumerate(self.labels) if lab in wanted]
        return Register(tuple(self.labels[i] for i in keep), tuple(self.dims[i] for i in keep))

    def permuted(self, labels: Sequence[str]) -> "Register":
        if sorted(labels) != sorted(self.labels):
            raise DomainError(f"{tuple(labels)} is not a permutation of {self.labels}")
        return Register(tuple(labels), tuple(self.dim_of(lab) for lab in labels))

    def __add__(self, other: "Register") -> "Register":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LabelCollisionError(f"label collision: {sorted(clash)}")
        return Register(self.labels + other.labels, self.dims + other.dims)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over a register."""

    register: Register
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.register.dim,):
            raise InvariantError(
                f"amplitude length {amps.shape[0]} != register dimension {self.register.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STRUCT_TOL:
            raise InvariantError(f"state norm {norm!r} differs from 1")

    def __eq__(self, other: object) -> bool:
        """Exact equality of register and every amplitude."""
        if not isinstance(other, PureState):
            return NotImplemented
        return self.register == other.register and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None

    @classmethod
    def normalized(cls, register: Register, amplitudes: np.ndarray) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(register, amps / norm)

    @classmethod
    def qubit(cls, label: str, vector: np.ndarray) -> "PureState":
        return cls.normalized(Register.qubits(label), vector)

    @property
    def dim(self) -> int:
        return self.register.dim

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.register.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "PureState") -> complex:
        """<self|other> on a shared register."""
        _require_same_register(self.register, other.register)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over a register."""

    register: Register
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _frozen(self.matrix)
        object.__setattr__(self, "matrix", mat)
        d = self.register.dim
        if mat.shape != (d, d):
            raise InvariantError(f"matrix shape {mat.shape} != ({d}, {d})")
        if np.max(np.abs(mat - mat.conj().T)) > STRUCT_TOL:
            raise InvariantError("density matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > STRUCT_TOL:
            raise InvariantError(f"density matrix trace {tr!r} differs from 1")
        if self.eigenvalues[0] < -STRUCT_TOL:
            raise InvariantError(f"negative eigenvalue {self.eigenvalues[0]!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.register == other.register and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues."""
        return np.linalg.eigvalsh(self.matrix)


def _block_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``eigh`` that first splits the matrix into its exactly decoupled blocks.

    Basis states connected by no chain of nonzero entries never mix, so the
    spectrum is the union of the blocks' spectra. Returns ascending
    eigenvalues and eigenvector columns on the full space.
    """
    d = matrix.shape[0]
    n_blocks, labels = connected_components(csr_matrix(matrix != 0), directed=False)
    if n_blocks == 1:
        return np.linalg.eigh(matrix)
    evals = np.empty(d)
    evecs = np.zeros((d, d), dtype=complex)
    col = 0
    for block in range(n_blocks):
        idx = np.flatnonzero(labels == block)
        w, v = np.linalg.eigh(matrix[np.ix_(idx, idx)])
        evals[col : col + idx.size] = w
        evecs[idx, col : col + idx.size] = v
        col += idx.size
    order = np.argsort(evals, kind="stable")
    return evals[order], evecs[:, order]


class HermitianOperator:
    """Hermitian matrix on a register with a lazily cached eigendecomposition.

    Energies are in units with ``hbar = 1``.
    """

    def __init__(self, register: Register, matrix: np.ndarray) -> None:
        mat = _frozen(matrix)
        d = register.dim
        if mat.shape != (d, d):
            raise InvariantError(f"operator shape {mat.shape} != ({d}, {d})")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > STRUCT_TOL:
            raise InvariantError("operator is not Hermitian")
        self.register = register
        self.matrix = mat

    def __repr__(self) -> str:
        return f"HermitianOperator(labels={self.register.labels})"

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and orthonormal eigenvector columns."""
        evals, evecs = _block_eigh(self.matrix)
        # Check H p = V diag(e) V^dagger p on a fixed dense probe: O(d^2)
        # instead of rebuilding the whole matrix.
        d = self.register.dim
        probe = np.exp(1j * 0.6180339887498949 * np.arange(d) ** 2) / np.sqrt(d)
        direct = self.matrix @ probe
        spectral = evecs @ (evals * (evecs.conj().T @ probe))
        scale = max(1.0, float(np.max(np.abs(self.matrix), initial=0.0)))
        if np.max(np.abs(direct - spectral), initial=0.0) > ORACLE_TOL * scale:
            raise InvariantError("spectral reconstruction failed")
        evals.setflags(write=False)
        evecs.setflags(write=False)
        return evals, evecs

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum[0]

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_register(self.register, other.register)
        return HermitianOperator(self.register, self.matrix + other.matrix)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(self.register, self.matrix * float(scalar))

    __rmul__ = __mul__

    def embed(self, register: Register) -> "HermitianOperator":
        """Extend to a larger register, acting as identity on the new subsystems."""
        return HermitianOperator(register, embed_matrix(self.matrix, self.register, register))


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of subsystem labels covering a register."""

    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        flat = [lab for b in blocks for lab in b]
        if any(len(b) == 0 for b in blocks):
            raise InvariantError("partition blocks must be nonempty")
        if len(flat) != len(set(flat)):
            raise InvariantError("partition blocks overlap")

    @classmethod
    def of(cls, *blocks: str | Sequence[str]) -> "Partition":
        """``Partition.of("atom", "spin")`` or ``Partition.of(["a", "b"], "c")``."""
        return cls(tuple((b,) if isinstance(b, str) else tuple(b) for b in blocks))

    @classmethod
    def singletons(cls, register: Register) -> "Partition":
        return cls(tuple((lab,) for lab in register.labels))

    def validate(self, register: Register) -> None:
        flat = {lab for b in self.blocks for lab in b}
        if flat != set(register.labels):
            raise DomainError(
                f"partition {self.blocks} does not cover register {register.labels}"
            )

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class RelativeStateDecomposition:
    """Expansion ``psi = sum_p b_p |A_p> (x) |p>`` in a chosen apparatus basis.

    ``relative_states[p]`` is ``None`` when ``coefficients[p] == 0``. The
    relative states are normalized but in general not mutually orthogonal.
    """

    apparatus: Register
    system: Register
    apparatus_basis: tuple[np.ndarray, ...]
    coefficients: np.ndarray
    relative_states: tuple[PureState | None, ...]
    target: Register = field(repr=False)

    def reconstruct(self) -> PureState:
        total = np.zeros(self.apparatus.dim * self.system.dim, dtype=complex)
        for vec, b, rel in zip(self.apparatus_basis, self.coefficients, self.relative_states):
            if rel is not None:
                total += b * np.kron(vec, rel.amplitudes)
        joint = PureState.normalized(self.apparatus + self.system, total)
        return reorder(joint, self.target.labels)

    def overlaps(self) -> np.ndarray:
        """Gram matrix of the non-null relative states."""
        vecs = np.array([r.amplitudes for r in self.relative_states if r is not None])
        return vecs.conj() @ vecs.T


def _require_same_register(a: Register, b: Register) -> None:
    if a != b:
        raise DomainError(f"register mismatch: {a.labels} vs {b.labels}")


def embed_matrix(matrix: np.ndarray, sub: Register, full: Register) -> np.ndarray:
    """Matrix of ``op (x) 1`` on ``full``, with ``op`` acting on ``sub``."""
    for lab in sub.labels:
        if full.dim_of(lab) != sub.dim_of(lab):
            raise DomainError(f"dimension mismatch for {lab!r}")
    rest = [lab for lab in full.labels if lab not in sub]
    rest_dim = int(np.prod([full.dim_of(lab) for lab in rest], dtype=np.int64)) if rest else 1
    big = np.kron(matrix, np.eye(rest_dim))
    order = list(sub.labels) + rest
    return _permute_operator(big, full.permuted(order), full.labels)


def _permute_operator(matrix: np.ndarray, register: Register, labels: Sequence[str]) -> np.ndarray:
    n = len(register)
    perm = [register.index(lab) for lab in labels]
    t = matrix.reshape(register.dims * 2)
    t = t.transpose(perm + [p + n for p in perm])
    d = register.dim
    return t.reshape(d, d)


def reorder(obj, labels: Sequence[str]):
    """Return the same state or density matrix with subsystems in ``labels`` order."""
    reg = obj.register
    new_reg = reg.permuted(labels)
    if isinstance(obj, PureState):
        perm = [reg.index(lab) for lab in labels]
        amps = obj.tensor_view().transpose(perm).reshape(-1)
        return PureState(new_reg, amps)
    if isinstance(obj, DensityMatrix):
        return DensityMatrix(new_reg, _permute_operator(obj.matrix, reg, labels))
    if isinstance(obj, HermitianOperator):
        return HermitianOperator(new_reg, _permute_operator(obj.matrix, reg, labels))
    raise TypeError(f"cannot reorder {type(obj).__name__}")


def tensor(*states: PureState) -> PureState:
    """Kronecker product; the combined register concatenates in argument order."""
    if len(states) == 1 and isinstance(states[0], (list, tuple)):
        states = tuple(states[0])
    if not states:
        raise DomainError("tensor needs at least one state")
    if len(states) == 1:
        return states[0]
    reg = states[0].register
    amps = states[0].amplitudes
    for s in states[1:]:
        reg = reg + s.register
        amps = np.kron(amps, s.amplitudes)
    return PureState(reg, amps)


def partial_trace(source: PureState | DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix on ``keep``, in the source register's order."""
    keep = list(keep) if not isinstance(keep, str) else [keep]
    if not keep:
        raise DomainError("keep must name at least one subsystem")
    reg = source.register
    kept = reg.sub(keep)
    traced = [lab for lab in reg.labels if lab not in kept]
    traced_dim = int(np.prod([reg.dim_of(l) for l in traced], dtype=np.int64)) if traced else 1
    keep_axes = [reg.index(lab) for lab in kept.labels]
    trace_axes = [reg.index(lab) for lab in traced]
    if isinstance(source, PureState):
        m = source.tensor_view().transpose(keep_axes + trace_axes).reshape(kept.dim, traced_dim)
        rho = m @ m.conj().T
    else:
        n = len(reg)
        t = source.matrix.reshape(reg.dims * 2)
        t = t.transpose(keep_axes + trace_axes + [n + a for a in keep_axes + trace_axes])
        t = t.reshape(kept.dim, traced_dim, kept.dim, traced_dim)
        rho = np.einsum("ajbj->ab", t)
    # Exact Hermitian symmetrization removes rounding asymmetry.
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(kept, rho / np.trace(rho).real)


def purity(rho: DensityMatrix | PureState) -> float:
    """``Tr rho^2``."""
    if isinstance(rho, PureState):
        rho = rho.density()
    m = rho.matrix
    return float(np.real(np.vdot(m.conj().T, m)))


def is_projector(rho: DensityMatrix, tol: float = STRUCT_TOL) -> bool:
    m = rho.matrix
    return bool(np.max(np.abs(m @ m - m)) <= tol)


def evolve_exact(h: HermitianOperator, t: float, psi0: PureState) -> PureState:
    """Spectral propagation ``sum_j exp(-i e_j t) |chi_j><chi_j|psi0>``.

    Reference route for every closed-form evolution in the package.
    """
    _require_same_register(h.register, psi0.register)
    if t == 0:
        return psi0
    evals, evecs = h.spectrum
    coeffs = evecs.conj().T @ psi0.amplitudes
    out = evecs @ (np.exp(-1j * evals * t) * coeffs)
    return PureState.normalized(psi0.register, out)


def commutes(a: HermitianOperator, b: HermitianOperator, tol: float = DECISION_TOL) -> bool:
    """True iff ``max|AB - BA| <= tol`` after embedding both on a shared register."""
    if a.register != b.register:
        extra = [lab for lab in b.register.labels if lab not in a.register]
        full = a.register + b.register.sub(extra) if extra else a.register
        a, b = a.embed(full), b.embed(full)
    comm = a.matrix @ b.matrix - b.matrix @ a.matrix
    return bool(np.max(np.abs(comm)) <= tol)


def _block_spectrum(psi: PureState, block: Sequence[str]) -> np.ndarray:
    return partial_trace(psi, block).eigenvalues


def schmidt_ranks(psi: PureState, partition: Partition, tol: float = DECISION_TOL) -> dict:
    """Schmidt rank of the cut separating each block from the rest."""
    partition.validate(psi.register)
    return {
        block: int(np.sum(_block_spectrum(psi, block) > tol)) for block in partition.blocks
    }


def is_product(psi: PureState, partition: Partition, tol: float = DECISION_TOL) -> bool:
    """True iff every block's reduced state is pure (largest eigenvalue >= 1 - tol)."""
    partition.validate(psi.register)
    return all(_block_spectrum(psi, block)[-1] >= 1.0 - tol for block in partition.blocks)


def relative_states(
    psi: PureState,
    cut: Partition,
    apparatus_basis: Sequence[np.ndarray],
    tol: float = DECISION_TOL,
) -> RelativeStateDecomposition:
    """Relative-state expansion of ``psi`` in an orthonormal apparatus basis.

    The first block of ``cut`` is the apparatus. For each basis vector
    ``|A_p>`` the partial inner product ``<A_p|psi>`` is a system-side
    vector; its norm is ``b_p`` and its normalization is the relative state.
    """
    cut.validate(psi.register)
    if len(cut) != 2:
        raise DomainError("relative_states needs a two-block cut")
    app = psi.register.sub(cut.blocks[0])
    sysr = psi.register.sub(cut.blocks[1])
    basis = [np.asarray(v, dtype=complex).reshape(-1) for v in apparatus_basis]
    if len(basis) != app.dim or any(v.shape != (app.dim,) for v in basis):
        raise InvariantError(f"apparatus basis must hold {app.dim} vectors of length {app.dim}")
    gram = np.array(basis).conj() @ np.array(basis).T
    if np.max(np.abs(gram - np.eye(app.dim))) > tol:
        raise InvariantError("apparatus basis is not orthonormal")
    ordered = reorder(psi, app.labels + sysr.labels)
    m = ordered.amplitudes.reshape(app.dim, sysr.dim)
    coeffs = []
    rels: list[PureState | None] = []
    for vec in basis:
        partial = vec.conj() @ m
        b = float(np.linalg.norm(partial))
        coeffs.append(b)
        rels.append(PureState(sysr, partial / b) if b > STRUCT_TOL else None)
    return RelativeStateDecomposition(
        apparatus=app,
        system=sysr,
        apparatus_basis=tuple(basis),
        coefficients=np.array(coeffs),
        relative_states=tuple(rels),
        target=psi.register,
    )


def gauge_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    vec = np.asarray(vec, dtype=complex)
    k = int(np.argmax(np.abs(vec)))
    if vec[k] == 0:
        return vec.copy()
    return vec * (abs(vec[k]) / vec[k])


def phase_distance(a: PureState | np.ndarray, b: PureState | np.ndarray) -> float:
    """Max amplitude difference after gauging both global phases.

    Both vectors are gauged on the same index (the largest entry of ``a``)
    so near-ties in magnitude cannot pick different reference amplitudes.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        _require_same_register(a.register, b.register)
    va = a.amplitudes if isinstance(a, PureState) else np.asarray(a, dtype=complex)
    vb = b.amplitudes if isinstance(b, PureState) else np.asarray(b, dtype=complex)
    k = int(np.argmax(np.abs(va)))
    ua = va * (abs(va[k]) / va[k]) if va[k] != 0 else va
    ub = vb * (abs(vb[k]) / vb[k]) if vb[k] != 0 else vb
    return float(np.max(np.abs(ua - ub)))


def write_debug_csv(obj: PureState | DensityMatrix | np.ndarray, path: str | Path) -> None:
    """Dump amplitudes (or row-major matrix entries) as ``index,re,im`` rows."""
    data = getattr(obj, "amplitudes", None)
    if data is None:
        data = getattr(obj, "matrix", obj)
    flat = np.asarray(data, dtype=complex).reshape(-1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im"])
        for i, z in enumerate(flat):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def read_debug_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = np.zeros(len(rows), dtype=complex)
    for row in rows:
        out[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    return out
