"""Experiment drivers behind ``pointerbasis run``.

Each driver takes a parsed config and an output directory, writes its CSV
files atomically and returns their names. Numerical self-checks that fail
raise :class:`ContractViolation`.
"""

from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Callable

import numpy as np

from . import bitmodel, envselect, infotheory, qcore, redundancy
from .config import ConfigError, ExperimentConfig
from .rng import derive_rng

# Largest environment for which collapse runs compare against the spectral oracle.
ORACLE_MAX_ATOMS = 10


class ContractViolation(RuntimeError):
    """A closed form disagreed with its oracle, or an invariant broke."""


@contextmanager
def atomic_write(path: Path):
    """Yield a temporary path in the target directory; rename it into place on success."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _complex(value) -> complex:
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def make_grid(spec: dict) -> np.ndarray:
    start, stop = float(spec["start"]), float(spec["stop"])
    if stop < start:
        raise ConfigError("grid.stop: must not be smaller than grid.start")
    if "num" in spec:
        return np.linspace(start, stop, int(spec["num"]))
    step = float(spec["step"])
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def make_environment(cfg: ExperimentConfig) -> envselect.EnvironmentSpec:
    couplings = cfg.params["couplings"]
    if isinstance(couplings, dict):
        low, high = float(couplings["low"]), float(couplings["high"])
        if not high > low:
            raise ConfigError("couplings.high: must exceed couplings.low")
        rng = derive_rng(cfg.seed, "couplings", 0)
        g = envselect._open_uniform(rng, low, high, int(couplings["n"]))
    else:
        g = np.asarray(couplings, dtype=float)
    imbalance = cfg.params.get("imbalance", 0.0)
    if isinstance(imbalance, list) and len(imbalance) != len(g):
        raise ConfigError("imbalance: needs one entry per coupling")
    return envselect.EnvironmentSpec.from_couplings(g, imbalance)


def _amplitudes(cfg: ExperimentConfig) -> tuple[complex, complex]:
    a, b = _complex(cfg.params["a"]), _complex(cfg.params["b"])
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
        raise ConfigError("a: |a|^2 + |b|^2 must equal 1")
    return a, b


def run_ztrace(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    spec = make_environment(cfg)
    trace = envselect.ztrace(spec, make_grid(cfg.params["grid"]), workers=workers)
    if trace.times[0] == 0.0 and trace.values[0] != 1.0:
        raise ContractViolation("z(0) != 1")
    with atomic_write(out / "ztrace.csv") as tmp:
        trace.to_csv(tmp)
    return ["ztrace.csv"]


def run_zstats(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    spec = make_environment(cfg)
    stats = envselect.z_stats(
        spec,
        float(cfg.params["horizon"]),
        int(cfg.params["samples"]),
        seed=cfg.seed,
        ensemble=bool(cfg.params.get("ensemble", False)),
        workers=workers,
    )
    with atomic_write(out / "zstats.csv") as tmp, open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_atoms", "mean_z_re", "mean_z_im", "stderr_z", "mean_abs_sq",
                    "stderr_abs_sq", "predicted_abs_sq", "horizon", "samples", "seed"])
        w.writerow([len(spec), _fmt(stats.mean_z.real), _fmt(stats.mean_z.imag),
                    _fmt(stats.stderr_z), _fmt(stats.mean_abs_sq), _fmt(stats.stderr_abs_sq),
                    _fmt(spec.predicted_abs_sq()), _fmt(cfg.params["horizon"]),
                    stats.samples, cfg.seed])
    return ["zstats.csv"]


def run_collapse(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    spec = make_environment(cfg)
    a, b = _amplitudes(cfg)
    times = make_grid(cfg.params["grid"])
    use_oracle = len(spec) <= ORACLE_MAX_ATOMS
    if use_oracle:
        h = envselect.h_environment(spec)
        psi0 = envselect.initial_env_state(spec, a, b)
    header = ["t", "re_z", "im_z", "abs_offdiag", "purity"] + (["oracle_dev"] if use_oracle else [])
    with atomic_write(out / "collapse.csv") as tmp, open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t in times:
            rho = envselect.rho_as_analytic(spec, a, b, t)
            z = envselect.z_of_t(spec, t)
            row = [_fmt(t), _fmt(z.real), _fmt(z.imag), _fmt(abs(rho.matrix[0, 3])),
                   _fmt(qcore.purity(rho))]
            if use_oracle:
                ref = qcore.partial_trace(qcore.evolve_exact(h, t, psi0), ["spin", "atom"])
                dev = float(np.max(np.abs(ref.matrix - rho.matrix)))
                if dev > qcore.ORACLE_TOL:
                    raise ContractViolation(f"rho_as oracle mismatch {dev:.3e} at t={t}")
                row.append(_fmt(dev))
            w.writerow(row)
    return ["collapse.csv"]


def run_info_timeseries(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    a, b = _amplitudes(cfg)
    model = bitmodel.BitModelConfig(a, b, float(cfg.params["g"]))
    times = make_grid(cfg.params["grid"])
    part = qcore.Partition.of("atom", "spin")
    reports = []
    h = bitmodel.h_as(model.g)
    psi0 = bitmodel.initial_state(model)
    for t in times:
        psi = bitmodel.evolve_bitbit(model, t)
        oracle = qcore.reorder(qcore.evolve_exact(h, t, psi0), ["spin", "atom"])
        if qcore.phase_distance(oracle, psi) > qcore.ORACLE_TOL:
            raise ContractViolation(f"bit model oracle mismatch at t={t}")
        reports.append(infotheory.info_report(psi, part))
    drift = max(abs(r.total - reports[0].total) for r in reports)
    if drift > qcore.ORACLE_TOL:
        raise ContractViolation(f"total information drifted by {drift:.3e}")
    with atomic_write(out / "info.csv") as tmp:
        infotheory.write_info_csv(tmp, times, reports)
    return ["info.csv"]


def run_redundancy(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    sizes = cfg.params["n_atoms"]
    sizes = [sizes] if isinstance(sizes, int) else list(sizes)
    count = cfg.params.get("flip_count")
    if count is not None and any(count > n for n in sizes):
        raise ConfigError("flip_count: must not exceed n_atoms")
    rows = [
        redundancy.reliability_curve(
            n,
            flip_count=count,
            flip_rate=cfg.params.get("flip_rate"),
            trials=int(cfg.params["trials"]),
            seed=cfg.seed,
            workers=workers,
        )
        for n in sizes
    ]
    with atomic_write(out / "redundancy.csv") as tmp:
        redundancy.write_reliability_csv(tmp, rows)
    return ["redundancy.csv"]


def run_recurrence(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    spec = make_environment(cfg)
    period = envselect.recurrence_time(spec)
    with atomic_write(out / "recurrence.csv") as tmp, open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_atoms", "commensurable", "recurrence_time", "abs_z_minus_1"])
        if period is None:
            w.writerow([len(spec), "false", "", ""])
        else:
            dev = abs(envselect.z_of_t(spec, period) - 1.0)
            w.writerow([len(spec), "true", _fmt(period), _fmt(dev)])
    return ["recurrence.csv"]


def run_ensemble_demo(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    p_up = float(cfg.params["p_up"])
    p_down = 1.0 - p_up
    up, down = qcore.PureState.qubit("spin", qcore.UP), qcore.PureState.qubit("spin", qcore.DOWN)
    odot = qcore.PureState.qubit("spin", qcore.ODOT)
    otimes = qcore.PureState.qubit("spin", qcore.OTIMES)
    preps = {
        "pointer": infotheory.Preparation(((p_up, up), (p_down, down))),
        "rotated": infotheory.Preparation(((p_up - p_down, up), (p_down, odot), (p_down, otimes))),
    }
    rhos = {name: infotheory.ensemble_density(p) for name, p in preps.items()}
    dev = float(np.max(np.abs(rhos["pointer"].matrix - rhos["rotated"].matrix)))
    if dev > qcore.STRUCT_TOL:
        raise ContractViolation(f"preparations differ by {dev:.3e}")
    with atomic_write(out / "ensemble.csv") as tmp, open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["preparation", "row", "col", "re", "im", "I_total"])
        for name, rho in rhos.items():
            info = infotheory.info_total(rho)
            for (i, j), v in np.ndenumerate(rho.matrix):
                w.writerow([name, i, j, _fmt(v.real), _fmt(v.imag), _fmt(info)])
    return ["ensemble.csv"]


DRIVERS: dict[str, Callable[[ExperimentConfig, Path, int], list[str]]] = {
    "ztrace": run_ztrace,
    "zstats": run_zstats,
    "collapse": run_collapse,
    "info_timeseries": run_info_timeseries,
    "redundancy": run_redundancy,
    "recurrence": run_recurrence,
    "ensemble_demo": run_ensemble_demo,
}
