"""Bit-by-bit measurement: one apparatus atom coupled to one spin.

The coupling is ``H = g (|bot><bot| - |top><top|) (x) sigma_z`` on the
register ``("atom", "spin")``. The closed-form trajectory and the
apparatus-system density matrices are returned on ``("spin", "atom")`` so
that the basis order is ``(up±, up∓, down±, down∓)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    BOT,
    DOWN,
    EXCITED,
    GROUND,
    PLUS,
    SIGMA_Z,
    STRUCT_TOL,
    TOP,
    UP,
    DensityMatrix,
    HermitianOperator,
    InvariantError,
    PureState,
    Register,
)

AS_REGISTER = Register.qubits("atom", "spin")
SA_REGISTER = Register.qubits("spin", "atom")

# Atom factor of the coupling: |bot><bot| - |top><top| = i(|±><∓| - |∓><±|).
ATOM_COUPLING = np.outer(BOT, BOT.conj()) - np.outer(TOP, TOP.conj())


@dataclass(frozen=True)
class BitModelConfig:
    a: complex
    b: complex
    g: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "g", float(self.g))
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > STRUCT_TOL:
            raise InvariantError("|a|^2 + |b|^2 must equal 1")
        if not self.g > 0:
            raise InvariantError("coupling g must be positive")

    @property
    def tau(self) -> float:
        """Time ``pi / 4g`` at which the atom becomes a perfect record."""
        return np.pi / (4.0 * self.g)


def h_as(g: float) -> HermitianOperator:
    if not g > 0:
        raise InvariantError("coupling g must be positive")
    return HermitianOperator(AS_REGISTER, g * np.kron(ATOM_COUPLING, SIGMA_Z))


def initial_state(cfg: BitModelConfig) -> PureState:
    """``|+> (x) (a|up> + b|down>)`` on ``("atom", "spin")``."""
    return PureState(AS_REGISTER, np.kron(PLUS, cfg.a * UP + cfg.b * DOWN))


def evolve_bitbit(cfg: BitModelConfig, t: float) -> PureState:
    """Closed-form state at time ``t`` on ``("spin", "atom")``."""
    phase = cfg.g * t
    atom_up = np.sin(np.pi / 4 + phase) * EXCITED + np.cos(np.pi / 4 + phase) * GROUND
    atom_down = np.sin(np.pi / 4 - phase) * EXCITED + np.cos(np.pi / 4 - phase) * GROUND
    amps = cfg.a * np.kron(UP, atom_up) + cfg.b * np.kron(DOWN, atom_down)
    return PureState.normalized(SA_REGISTER, amps)


def correlated_state(a: complex, b: complex) -> PureState:
    """``a|up>|±> + b|down>|∓>`` on ``("spin", "atom")``, normalized."""
    return PureState(SA_REGISTER, a * np.kron(UP, EXCITED) + b * np.kron(DOWN, GROUND))


def rho_pure_as(cfg: BitModelConfig) -> DensityMatrix:
    a, b = cfg.a, cfg.b
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = abs(a) ** 2
    m[3, 3] = abs(b) ** 2
    m[0, 3] = a * np.conj(b)
    m[3, 0] = np.conj(a) * b
    return DensityMatrix(SA_REGISTER, m)


def rho_mix_as(cfg: BitModelConfig) -> DensityMatrix:
    """Pointer-diagonal mixture: ``rho_pure_as`` with the coherences deleted."""
    return DensityMatrix(SA_REGISTER, np.diag([abs(cfg.a) ** 2, 0.0, 0.0, abs(cfg.b) ** 2]))
