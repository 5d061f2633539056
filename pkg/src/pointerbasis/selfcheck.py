"""Fast invariant suite run by ``pointerbasis selfcheck``."""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import bitmodel, envselect, infotheory, qcore, redundancy
from .rng import derive_rng

SEED = 20240601


def _random_unit_pair(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def random_env_atom(rng: np.random.Generator) -> envselect.EnvAtom:
    alpha, beta = _random_unit_pair(rng)
    return envselect.EnvAtom(rng.uniform(0.05, 1.0), alpha, beta)


def check_rho_as_oracle() -> tuple[bool, str]:
    rng = derive_rng(SEED, "selfcheck/rho_as")
    worst_rho = worst_z = 0.0
    for _ in range(24):
        n = int(rng.integers(1, 9))
        spec = envselect.EnvironmentSpec(tuple(random_env_atom(rng) for _ in range(n)))
        a, b = _random_unit_pair(rng)
        t = rng.uniform(0, 20)
        psi = qcore.evolve_exact(envselect.h_environment(spec), t, envselect.initial_env_state(spec, a, b))
        ref = qcore.partial_trace(psi, ["spin", "atom"])
        rho = envselect.rho_as_analytic(spec, a, b, t)
        worst_rho = max(worst_rho, float(np.max(np.abs(ref.matrix - rho.matrix))))
        z_ratio = ref.matrix[0, 3] / (a * np.conj(b))
        worst_z = max(worst_z, abs(z_ratio - envselect.z_of_t(spec, t)))
    ok = worst_rho <= qcore.ORACLE_TOL and worst_z <= qcore.ORACLE_TOL
    return ok, f"rho_as oracle: max|Δ| < 1e-10 (observed {worst_rho:.2e}, z {worst_z:.2e})"


def check_bitbit_oracle() -> tuple[bool, str]:
    rng = derive_rng(SEED, "selfcheck/bitbit")
    worst = 0.0
    for _ in range(50):
        a, b = _random_unit_pair(rng)
        cfg = bitmodel.BitModelConfig(a, b, rng.uniform(0.1, 3.0))
        t = rng.uniform(0, 10)
        ref = qcore.reorder(qcore.evolve_exact(bitmodel.h_as(cfg.g), t, bitmodel.initial_state(cfg)), ["spin", "atom"])
        worst = max(worst, qcore.phase_distance(ref, bitmodel.evolve_bitbit(cfg, t)))
    return worst <= qcore.ORACLE_TOL, f"bit model oracle: max|Δ| < 1e-10 (observed {worst:.2e})"


def check_info_convention() -> tuple[bool, str]:
    pure = qcore.tensor(qcore.PureState.qubit("a", qcore.UP), qcore.PureState.qubit("b", qcore.PLUS))
    mixed = qcore.DensityMatrix(qcore.Register.qubits("a"), np.eye(2) / 2)
    dev = max(
        abs(infotheory.info_total(pure.density()) - np.log(4)),
        abs(infotheory.info_total(mixed) - 0.0),
    )
    return dev <= qcore.STRUCT_TOL, f"info convention pin: I(pure,4)=ln 4, I(mixed qubit)=0 (dev {dev:.2e})"


def check_worked_values() -> tuple[bool, str]:
    h = np.sqrt(0.5)
    rep = infotheory.info_report(bitmodel.correlated_state(h, h), qcore.Partition.of("atom", "spin"))
    got = np.array([rep.total, *rep.per_block, rep.correlation])
    want = np.array([np.log(4), 0.0, 0.0, np.log(4)])
    dev = float(np.max(np.abs(got - want)))
    return dev <= qcore.STRUCT_TOL, f"correlated pair information (ln4, 0, 0, ln4) (dev {dev:.2e})"


def check_recurrence() -> tuple[bool, str]:
    spec = envselect.EnvironmentSpec.from_couplings([0.1, 0.2, 0.3])
    period = envselect.recurrence_time(spec)
    ok = period is not None and abs(period - np.pi / 0.1) <= 1e-9
    ok = ok and abs(envselect.z_of_t(spec, period) - 1) <= qcore.ORACLE_TOL
    ok = ok and envselect.recurrence_time(envselect.EnvironmentSpec.from_couplings([1.0, np.sqrt(2)])) is None
    return ok, "recurrence: g=(0.1,0.2,0.3) -> pi/0.1, (1, sqrt2) -> none"


def check_ensembles() -> tuple[bool, str]:
    spin = lambda v: qcore.PureState.qubit("spin", v)  # noqa: E731
    r1 = infotheory.ensemble_density(infotheory.Preparation(((0.75, spin(qcore.UP)), (0.25, spin(qcore.DOWN)))))
    r2 = infotheory.ensemble_density(
        infotheory.Preparation(((0.5, spin(qcore.UP)), (0.25, spin(qcore.ODOT)), (0.25, spin(qcore.OTIMES))))
    )
    dev = float(np.max(np.abs(r1.matrix - r2.matrix)))
    return dev <= qcore.STRUCT_TOL, f"ensemble nonuniqueness (dev {dev:.2e})"


def check_redundancy() -> tuple[bool, str]:
    maj, par = redundancy.reliability_exhaustive(3, 1)
    return (maj == 1.0 and par == 0.0), f"N=3 single flip: majority {maj}, parity {par}"


CHECKS: list[Callable[[], tuple[bool, str]]] = [
    check_rho_as_oracle,
    check_bitbit_oracle,
    check_info_convention,
    check_worked_values,
    check_recurrence,
    check_ensembles,
    check_redundancy,
]


def run_selfcheck(echo: Callable[[str], None] = print) -> bool:
    all_ok = True
    for check in CHECKS:
        try:
            ok, msg = check()
        except Exception as exc:  # a crashing check is a failed check
            ok, msg = False, f"{check.__name__}: {type(exc).__name__}: {exc}"
        all_ok &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {msg}")
    return all_ok
