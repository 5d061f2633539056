"""Environment-induced superselection with an N-atom environment.

Full register order: ``("spin", "atom", "env1", ..., "envN")``. Each
environment atom ``k`` is coupled to the apparatus atom by

    H_k = -g_k (|bot)(bot| - |top)(top|)_k (x) (|±><±| - |∓><∓|)_atom

and starts in ``alpha_k |bot) + beta_k |top)``. With this sign the branch
overlap of the environment reproduces the damping factor

    z(t) = prod_k [cos 2 g_k t + i (|alpha_k|^2 - |beta_k|^2) sin 2 g_k t]

in the ``|up,±><down,∓|`` coherence of the reduced apparatus-system matrix.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from pathlib import Path
from typing import Sequence

import numpy as np

from .bitmodel import ATOM_COUPLING, SA_REGISTER, correlated_state
from .qcore import (
    BOT,
    EXCITED,
    GROUND,
    ORACLE_TOL,
    STRUCT_TOL,
    TOP,
    DensityMatrix,
    DomainError,
    HermitianOperator,
    InvariantError,
    PureState,
    Register,
)
from .rng import derive_rng

POINTER_Z = np.outer(EXCITED, EXCITED) - np.outer(GROUND, GROUND)

# Fixed chunk size for sampled reductions; results never depend on worker count.
CHUNK = 8192


@dataclass(frozen=True)
class EnvAtom:
    g: float
    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > STRUCT_TOL:
            raise InvariantError("|alpha|^2 + |beta|^2 must equal 1")

    @classmethod
    def from_imbalance(cls, g: float, imbalance: float) -> "EnvAtom":
        """Real amplitudes with ``|alpha|^2 - |beta|^2 = imbalance``."""
        if not -1.0 <= imbalance <= 1.0:
            raise InvariantError("imbalance must lie in [-1, 1]")
        return cls(g, np.sqrt((1.0 + imbalance) / 2.0), np.sqrt((1.0 - imbalance) / 2.0))

    @property
    def imbalance(self) -> float:
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2

    @property
    def gamma(self) -> float:
        return abs(self.imbalance)

    @property
    def vector(self) -> np.ndarray:
        """Initial state in the ``(|±), |∓))`` basis."""
        return self.alpha * BOT + self.beta * TOP


@dataclass(frozen=True)
class EnvironmentSpec:
    atoms: tuple[EnvAtom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(self.atoms) < 1:
            raise InvariantError("environment needs at least one atom")

    @classmethod
    def from_couplings(cls, couplings: Sequence[float], imbalance: float | Sequence[float] = 0.0) -> "EnvironmentSpec":
        imb = np.broadcast_to(np.asarray(imbalance, dtype=float), (len(couplings),))
        return cls(tuple(EnvAtom.from_imbalance(g, x) for g, x in zip(couplings, imb)))

    @classmethod
    def random(
        cls,
        n: int,
        seed: int | np.random.Generator,
        imbalance: float | Sequence[float] = 0.0,
        low: float = 0.0,
        high: float = 1.0,
    ) -> "EnvironmentSpec":
        """Couplings uniform on the open interval ``(low, high)``."""
        rng = derive_rng(seed, "couplings", n)
        g = _open_uniform(rng, low, high, n)
        return cls.from_couplings(g, imbalance)

    def __len__(self) -> int:
        return len(self.atoms)

    def __add__(self, other: "EnvironmentSpec") -> "EnvironmentSpec":
        return EnvironmentSpec(self.atoms + other.atoms)

    @property
    def couplings(self) -> np.ndarray:
        return np.array([a.g for a in self.atoms])

    @property
    def imbalances(self) -> np.ndarray:
        return np.array([a.imbalance for a in self.atoms])

    @property
    def gammas(self) -> np.ndarray:
        return np.abs(self.imbalances)

    def predicted_abs_sq(self) -> float:
        """Long-time average of ``|z|^2``: ``prod (1 + gamma_k^2) / 2``."""
        return float(np.prod((1.0 + self.gammas**2) / 2.0))

    @property
    def register(self) -> Register:
        return Register.qubits("spin", "atom", *env_labels(len(self)))


def _open_uniform(rng: np.random.Generator, low: float, high: float, n: int) -> np.ndarray:
    g = rng.uniform(low, high, n)
    # uniform() is half-open; redraw exact endpoints.
    while np.any(g <= low):
        bad = g <= low
        g[bad] = rng.uniform(low, high, int(bad.sum()))
    return g


def env_labels(n: int) -> tuple[str, ...]:
    return tuple(f"env{k}" for k in range(1, n + 1))


def h_ae_k(k: int, spec: EnvironmentSpec) -> HermitianOperator:
    """Coupling of environment atom ``k`` (1-based) on ``("atom", "env1", ...)``."""
    n = len(spec)
    if not 1 <= k <= n:
        raise DomainError(f"environment atom index {k} outside 1..{n}")
    reg = Register.qubits("atom", *env_labels(n))
    local = Register.qubits("atom", f"env{k}")
    op = HermitianOperator(local, -spec.atoms[k - 1].g * np.kron(POINTER_Z, ATOM_COUPLING))
    return op.embed(reg)


def h_environment(spec: EnvironmentSpec) -> HermitianOperator:
    """Sum of all couplings, embedded on the full register."""
    full = spec.register
    total = np.zeros((full.dim, full.dim), dtype=complex)
    for k in range(1, len(spec) + 1):
        local = Register.qubits("atom", f"env{k}")
        op = HermitianOperator(local, -spec.atoms[k - 1].g * np.kron(POINTER_Z, ATOM_COUPLING))
        total += op.embed(full).matrix
    return HermitianOperator(full, total)


def initial_env_state(spec: EnvironmentSpec, a: complex, b: complex) -> PureState:
    """Correlated spin-atom pair times the initial environment product state."""
    amps = correlated_state(a, b).amplitudes
    for atom in spec.atoms:
        amps = np.kron(amps, atom.vector)
    return PureState.normalized(spec.register, amps)


def branch_environments(spec: EnvironmentSpec, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Environment states conditioned on the pointer states ``|±>`` and ``|∓>``."""
    up = np.ones(1, dtype=complex)
    down = np.ones(1, dtype=complex)
    for atom in spec.atoms:
        ph = np.exp(1j * atom.g * t)
        up = np.kron(up, atom.alpha * ph * BOT + atom.beta * np.conj(ph) * TOP)
        down = np.kron(down, atom.alpha * np.conj(ph) * BOT + atom.beta * ph * TOP)
    return up, down


def evolve_env(spec: EnvironmentSpec, a: complex, b: complex, t: float) -> PureState:
    """Closed-form global state at time ``t``."""
    env_up, env_down = branch_environments(spec, t)
    pair = correlated_state(a, b).amplitudes
    # pair index 0 = up,±; index 3 = down,∓; the others vanish.
    amps = np.concatenate(
        [pair[0] * env_up, np.zeros_like(env_up), np.zeros_like(env_up), pair[3] * env_down]
    )
    return PureState.normalized(spec.register, amps)


def z_of_t(spec: EnvironmentSpec, t):
    """Correlation-damping factor; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    g = spec.couplings.reshape((-1,) + (1,) * t.ndim)
    imb = spec.imbalances.reshape(g.shape)
    factors = np.cos(2.0 * g * t) + 1j * imb * np.sin(2.0 * g * t)
    z = np.prod(factors, axis=0)
    return complex(z) if t.ndim == 0 else z


def rho_as_analytic(spec: EnvironmentSpec, a: complex, b: complex, t: float) -> DensityMatrix:
    a, b = complex(a), complex(b)
    z = z_of_t(spec, t)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = abs(a) ** 2
    m[3, 3] = abs(b) ** 2
    m[0, 3] = z * a * np.conj(b)
    m[3, 0] = np.conj(m[0, 3])
    return DensityMatrix(SA_REGISTER, m)


@dataclass(frozen=True)
class ZTrace:
    times: np.ndarray
    values: np.ndarray
    mean_z: complex
    mean_abs_sq: float
    max_abs_after_burn_in: float
    burn_in: float

    def to_csv(self, path: str | Path) -> None:
        write_ztrace_csv(self, path)


def ztrace(spec: EnvironmentSpec, t_grid, workers: int = 1) -> ZTrace:
    """Sample ``z`` on a sorted grid and summarize it.

    Burn-in is ``1 / min g_k``; the max-modulus statistic ignores earlier
    samples (NaN if the grid ends before the burn-in).
    """
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    if times.size == 0:
        raise ValueError("time grid is empty")
    if np.any(np.diff(times) < 0):
        raise ValueError("time grid must be sorted ascending")
    chunks = [times[i : i + CHUNK] for i in range(0, times.size, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: z_of_t(spec, c), chunks))
    else:
        parts = [z_of_t(spec, c) for c in chunks]
    values = np.concatenate(parts)
    burn_in = 1.0 / float(np.min(spec.couplings))
    late = np.abs(values[times >= burn_in])
    return ZTrace(
        times=times,
        values=values,
        mean_z=complex(np.mean(values)),
        mean_abs_sq=float(np.mean(np.abs(values) ** 2)),
        max_abs_after_burn_in=float(late.max()) if late.size else float("nan"),
        burn_in=burn_in,
    )


def write_ztrace_csv(trace: ZTrace, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "re_z", "im_z", "abs_z"])
        for t, z in zip(trace.times, trace.values):
            w.writerow([_fmt(t), _fmt(z.real), _fmt(z.imag), _fmt(abs(z))])


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ZStats:
    mean_z: complex
    mean_abs_sq: float
    stderr_z: float
    stderr_abs_sq: float
    samples: int


def z_stats(
    spec: EnvironmentSpec,
    horizon: float,
    sample_count: int,
    seed: int = 0,
    ensemble: bool = False,
    workers: int = 1,
) -> ZStats:
    """Long-time averages of ``z`` and ``|z|^2`` over uniform ``t`` in ``(0, T]``.

    With ``ensemble=True`` every sample also redraws the couplings uniformly
    on ``(0, 1)`` (amplitudes kept), giving an ensemble-plus-time average.
    Sampling runs in fixed-size chunks with their own substreams, and chunk
    sums are combined in chunk order, so the result is independent of
    ``workers``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    bounds = [(i, min(i + CHUNK, sample_count)) for i in range(0, sample_count, CHUNK)]

    def run(idx: int) -> np.ndarray:
        lo, hi = bounds[idx]
        rng = derive_rng(seed, "zstats", idx)
        t = horizon * (1.0 - rng.random(hi - lo))
        if ensemble:
            g = _open_uniform(rng, 0.0, 1.0, (hi - lo) * len(spec)).reshape(hi - lo, len(spec)).T
            imb = spec.imbalances[:, None]
            z = np.prod(np.cos(2 * g * t) + 1j * imb * np.sin(2 * g * t), axis=0)
        else:
            z = z_of_t(spec, t)
        a2 = np.abs(z) ** 2
        return np.array([z.sum(), a2.sum(), (a2**2).sum()])

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            sums = np.array(list(pool.map(run, range(len(bounds)))))
    else:
        sums = np.array([run(i) for i in range(len(bounds))])
    s_z, s_a2, s_a4 = np.sum(sums, axis=0)
    n = sample_count
    mean_z = complex(s_z / n)
    mean_a2 = float(s_a2.real / n)
    var_z = max(mean_a2 - abs(mean_z) ** 2, 0.0)
    var_a2 = max(float(s_a4.real / n) - mean_a2**2, 0.0)
    denom = max(n - 1, 1)
    return ZStats(
        mean_z=mean_z,
        mean_abs_sq=mean_a2,
        stderr_z=float(np.sqrt(var_z / denom)),
        stderr_abs_sq=float(np.sqrt(var_a2 / denom)),
        samples=n,
    )


def _first_convergent(x: float, tol: float, max_denominator: int) -> Fraction | None:
    """Smallest-denominator continued-fraction convergent within ``tol`` of ``x``."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    rest = x
    while True:
        a = int(np.floor(rest))
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_denominator:
            return None
        if abs(h1 / k1 - x) <= tol * max(1.0, abs(x)):
            return Fraction(h1, k1)
        frac = rest - a
        if frac == 0:
            return None
        rest = 1.0 / frac


def recurrence_time(
    spec: EnvironmentSpec, tol: float = 1e-9, max_denominator: int = 10**6
) -> float | None:
    """Exact recurrence time ``pi / g0`` when all couplings are multiples of ``g0``.

    Each ratio to the first coupling is replaced by its first continued
    fraction convergent within ``tol``. The result is returned only if ``z``
    is back at 1 within 1e-10 at the candidate period, so near-rational
    ratios (long convergents with residual phase drift) yield ``None``.
    """
    g = spec.couplings
    base = g[0]
    fracs = []
    for gk in g:
        f = _first_convergent(gk / base, tol, max_denominator)
        if f is None:
            return None
        fracs.append(f)
    common = reduce(lcm, (f.denominator for f in fracs), 1)
    multiples = [f.numerator * (common // f.denominator) for f in fracs]
    g0 = base * reduce(gcd, multiples) / common
    period = np.pi / g0
    if abs(z_of_t(spec, period) - 1.0) > ORACLE_TOL:
        return None
    return float(period)
