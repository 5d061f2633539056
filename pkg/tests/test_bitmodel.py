import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pointerbasis.bitmodel import (
    BitModelConfig,
    correlated_state,
    evolve_bitbit,
    h_as,
    initial_state,
    rho_mix_as,
    rho_pure_as,
)
from pointerbasis.qcore import (
    EXCITED,
    MINUS,
    ODOT,
    OTIMES,
    PLUS,
    SIGMA_Z,
    UP,
    HermitianOperator,
    InvariantError,
    Partition,
    Register,
    commutes,
    evolve_exact,
    partial_trace,
    phase_distance,
    purity,
    relative_states,
    reorder,
)

H = np.sqrt(0.5)


@st.composite
def configs(draw):
    theta = draw(st.floats(0, np.pi / 2))
    phi = draw(st.floats(0, 2 * np.pi))
    g = draw(st.floats(0.01, 5.0))
    return BitModelConfig(np.cos(theta), np.sin(theta) * np.exp(1j * phi), g)


def test_config_validation():
    with pytest.raises(InvariantError):
        BitModelConfig(1.0, 1.0, 1.0)
    with pytest.raises(InvariantError):
        BitModelConfig(1.0, 0.0, 0.0)
    with pytest.raises(InvariantError):
        h_as(-1.0)


def test_tau():
    assert BitModelConfig(1, 0, 2.0).tau == pytest.approx(np.pi / 8)


def test_h_as_spectrum():
    np.testing.assert_allclose(h_as(1.0).eigenvalues, [-1, -1, 1, 1], atol=1e-12)


def test_h_as_is_nondemolition():
    assert commutes(h_as(0.7), HermitianOperator(Register.qubits("spin"), SIGMA_Z))


def test_start_is_initial_product():
    cfg = BitModelConfig(0.6, 0.8j, 1.3)
    want = reorder(initial_state(cfg), ["spin", "atom"])
    np.testing.assert_allclose(evolve_bitbit(cfg, 0.0).amplitudes, want.amplitudes, atol=1e-15)


def test_tau_gives_correlated_pair():
    cfg = BitModelConfig(0.6, 0.8j, 1.3)
    np.testing.assert_allclose(
        evolve_bitbit(cfg, cfg.tau).amplitudes, correlated_state(cfg.a, cfg.b).amplitudes, atol=1e-12
    )


def test_equal_weights_reexpand_into_conjugate_records():
    cfg = BitModelConfig(H, H, 1.0)
    dec = relative_states(evolve_bitbit(cfg, cfg.tau), Partition.of("atom", "spin"), [PLUS, MINUS])
    np.testing.assert_allclose(dec.coefficients, [H, H], atol=1e-12)
    assert phase_distance(dec.relative_states[0].amplitudes, ODOT) < 1e-12
    assert phase_distance(dec.relative_states[1].amplitudes, OTIMES) < 1e-12


def test_rho_pure_single_branch():
    rho = rho_pure_as(BitModelConfig(1, 0, 1))
    v = np.kron(UP, EXCITED)
    np.testing.assert_allclose(rho.matrix, np.outer(v, v), atol=0)


def test_rho_pure_equal_weights():
    m = rho_pure_as(BitModelConfig(H, H, 1)).matrix
    nz = np.abs(m) > 1e-15
    assert nz.sum() == 4
    np.testing.assert_allclose(m[nz], 0.5, atol=1e-15)


def test_rho_mix():
    assert purity(rho_mix_as(BitModelConfig(H, H, 1))) == pytest.approx(0.5, abs=1e-15)
    assert purity(rho_mix_as(BitModelConfig(np.sqrt(0.75), 0.5, 1))) == pytest.approx(0.625, abs=1e-15)
    m = rho_mix_as(BitModelConfig(0.6, 0.8, 1)).matrix
    assert np.max(np.abs(m - np.diag(np.diag(m)))) == 0.0


@settings(max_examples=200, deadline=None)
@given(configs(), st.floats(0, 50))
def test_matches_oracle(cfg, t):
    ref = reorder(evolve_exact(h_as(cfg.g), t, initial_state(cfg)), ["spin", "atom"])
    assert phase_distance(ref, evolve_bitbit(cfg, t)) <= 1e-10


@given(configs())
def test_reduced_matrices_at_tau(cfg):
    psi = evolve_bitbit(cfg, cfg.tau)
    want = np.diag([abs(cfg.a) ** 2, abs(cfg.b) ** 2])
    np.testing.assert_allclose(partial_trace(psi, ["spin"]).matrix, want, atol=1e-12)
    np.testing.assert_allclose(partial_trace(psi, ["atom"]).matrix, want, atol=1e-12)


@given(configs(), st.floats(0, 20))
def test_period(cfg, t):
    later = evolve_bitbit(cfg, t + 2 * np.pi / cfg.g)
    assert phase_distance(later, evolve_bitbit(cfg, t)) <= 1e-10


@given(configs())
def test_pure_and_mixed_share_diagonal(cfg):
    assert np.array_equal(np.diag(rho_pure_as(cfg).matrix), np.diag(rho_mix_as(cfg).matrix))
