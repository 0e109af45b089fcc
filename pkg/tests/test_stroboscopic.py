import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdet.detection import degenerate_dark_state, exact_pdet
from pdet.graphs import State, basis_state, named_graph
from pdet.spectral import eigendecompose, propagator
from pdet.stroboscopic import (
    TRIAL_BLOCK,
    detection_statistics,
    first_detection_amplitudes,
    sample_trajectories,
)

from conftest import SMALL, random_state


def naive_amplitudes(u, d, psi, n_max):
    """phi_n straight from the definition, building the projected propagator explicitly."""
    proj = np.eye(len(d)) - np.outer(d, d.conj())
    out = []
    for n in range(1, n_max + 1):
        m = u @ np.linalg.matrix_power(proj @ u, n - 1)
        out.append(np.vdot(d, m @ psi))
    return np.array(out)


@pytest.mark.parametrize("tau", [0.3, 1.0, 2.2])
def test_recursion_matches_definition(ring6, tau):
    h, d = ring6
    u = propagator(eigendecompose(h), tau)
    psi = basis_state(h, 2)
    rec = first_detection_amplitudes(u, d, psi, 12)
    np.testing.assert_allclose(rec.phis, naive_amplitudes(u.matrix, d.amplitudes, psi.amplitudes, 12), atol=1e-12)
    assert rec.phis[0] == pytest.approx(u.matrix[0, 2], abs=1e-14)


def test_dark_state_never_clicks(ring6):
    h, d = ring6
    dec = eigendecompose(h)
    dark = degenerate_dark_state(dec.levels[1], d)
    for tau in (0.7, 1.0):
        rec = first_detection_amplitudes(propagator(dec, tau), d, dark, 1000)
        assert np.abs(rec.phis).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SMALL), st.floats(0.1, 3.0), st.integers(0, 2**32 - 1))
def test_partial_sums_monotone_and_below_exact(graph, tau, seed):
    h = named_graph(*graph)
    dec = eigendecompose(h)
    d = basis_state(h, 0)
    psi = State(random_state(np.random.default_rng(seed), h.dim), h.labels)
    rec = first_detection_amplitudes(propagator(dec, tau), d, psi, 300)
    s = rec.partial_sums
    assert np.all(np.diff(s) >= -1e-15)
    assert s[-1] <= exact_pdet(dec, d, psi) + 1e-9
    # probability bookkeeping: detected + still in play = 1
    np.testing.assert_allclose(s + rec.survival, 1.0, atol=1e-10)


def test_amplitudes_linear_in_initial_state(ring6):
    h, d = ring6
    u = propagator(eigendecompose(h), 0.9)
    rng = np.random.default_rng(1)
    a, b = random_state(rng, 6), random_state(rng, 6)
    ra = first_detection_amplitudes(u, d, State(a, h.labels), 20).phis
    rb = first_detection_amplitudes(u, d, State(b, h.labels), 20).phis
    rab = first_detection_amplitudes(u, d, State(2 * a - 1j * b, h.labels), 20).phis
    np.testing.assert_allclose(rab, 2 * ra - 1j * rb, atol=1e-12)


def test_converges_to_exact_at_generic_tau(ring6):
    h, d = ring6
    dec = eigendecompose(h)
    psi = basis_state(h, 1)
    rec = first_detection_amplitudes(propagator(dec, 1.0), d, psi, 10_000)
    assert abs(detection_statistics(rec).final - exact_pdet(dec, d, psi)) < 1e-6


def test_exceptional_flag():
    h = named_graph("ring", 4)
    dec = eigendecompose(h)
    rec = first_detection_amplitudes(propagator(dec, np.pi), basis_state(h, 0), basis_state(h, 1), 5)
    assert rec.exceptional and rec.exceptional_pairs
    rec = first_detection_amplitudes(propagator(dec, 1.0), basis_state(h, 0), basis_state(h, 1), 5)
    assert not rec.exceptional


def test_zero_attempts(ring6):
    h, d = ring6
    rec = first_detection_amplitudes(propagator(eigendecompose(h), 1.0), d, d, 0)
    assert rec.phis.size == 0
    stats = detection_statistics(rec)
    assert stats.final == 0.0 and stats.undetected == 1.0
    assert rec.to_csv() == "n,re_phi,im_phi,p_n,S_n\n"
    with pytest.raises(ValueError):
        first_detection_amplitudes(propagator(eigendecompose(h), 1.0), d, d, -1)


def test_csv_roundtrip(ring6):
    h, d = ring6
    rec = first_detection_amplitudes(propagator(eigendecompose(h), 1.0), d, basis_state(h, 1), 7)
    rows = [line.split(",") for line in rec.to_csv().strip().split("\n")]
    assert rows[0] == ["n", "re_phi", "im_phi", "p_n", "S_n"]
    assert len(rows) == 8
    phis = np.array([float(r[1]) + 1j * float(r[2]) for r in rows[1:]])
    np.testing.assert_array_equal(phis, rec.phis)
    assert float(rows[-1][4]) == rec.partial_sums[-1]


def test_trajectories_dark_and_self(ring6):
    h, d = ring6
    dec = eigendecompose(h)
    u = propagator(dec, 1.0)
    dark = degenerate_dark_state(dec.levels[2], d)
    assert sample_trajectories(u, d, dark, 200, 2000, seed=3).fraction == 0.0
    # psi = d: the first attempt sees U d, so detection is likely but not certain per step
    est = sample_trajectories(u, d, d, 2000, 2000, seed=3)
    assert est.fraction > 0.98


def test_trajectories_agree_with_partial_sum(ring6):
    h, d = ring6
    dec = eigendecompose(h)
    psi = basis_state(h, 1)
    u = propagator(dec, 0.7)
    n = 300
    s_n = first_detection_amplitudes(u, d, psi, n).partial_sums[-1]
    est = sample_trajectories(u, d, psi, n, 20_000, seed=7)
    assert abs(est.fraction - s_n) < 4 * max(est.stderr, 1e-3)


def test_trajectories_reproducible_and_block_independent(ring6):
    h, d = ring6
    u = propagator(eigendecompose(h), 1.3)
    psi = basis_state(h, 2)
    a = sample_trajectories(u, d, psi, 50, TRIAL_BLOCK + 100, seed=5)
    b = sample_trajectories(u, d, psi, 50, TRIAL_BLOCK + 100, seed=5)
    assert a == b
    # the first block's outcomes do not depend on how many trials follow
    first = sample_trajectories(u, d, psi, 50, TRIAL_BLOCK, seed=5)
    rest = sample_trajectories(u, d, psi, 50, TRIAL_BLOCK + 100, seed=5)
    assert rest.fraction * rest.trials >= first.fraction * first.trials
    assert a.to_dict()["trials"] == TRIAL_BLOCK + 100
    with pytest.raises(ValueError):
        sample_trajectories(u, d, psi, 10, 0, seed=1)
