import io
import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpgraph.minipatch import (
    Minipatch,
    MPGraphConfig,
    SelectionState,
    coverage_diagnostics,
    iteration_rng,
    resolve_patch_size,
    run_mpgraph,
    sample_minipatch,
    selection_frequencies,
    stable_edge_set,
    update_counters,
)
from mpgraph.synth import make_model, sample_gaussian
from mpgraph.tglasso import fit_thresholded
from oracles import replay_counters


def _chain_data(N, M, seed=0):
    model = make_model("chain", M, seed)
    return sample_gaussian(model, N, seed)


def test_full_draw_takes_everything():
    for seed in range(20):
        patch = sample_minipatch(np.random.default_rng(seed), 5, 7, 5, 7, 0)
        assert np.array_equal(patch.obs_idx, np.arange(5))
        assert np.array_equal(patch.node_idx, np.arange(7))


def test_draws_are_distinct_sorted_and_in_bounds():
    rng = np.random.default_rng(0)
    for k in range(10_000):
        patch = sample_minipatch(rng, 30, 12, 7, 4, k)
        for idx, bound in ((patch.obs_idx, 30), (patch.node_idx, 12)):
            assert np.all(np.diff(idx) > 0)
            assert idx[0] >= 0 and idx[-1] < bound


def test_inclusion_frequency_matches_marginal():
    rng = np.random.default_rng(1)
    counts = np.zeros(10)
    for k in range(100_000):
        counts[sample_minipatch(rng, 10, 2, 3, 2, k).obs_idx] += 1
    assert np.all(np.abs(counts / 100_000 - 0.3) <= 0.01)


def test_sampling_rejects_oversized_patches():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_minipatch(rng, 5, 5, 6, 2, 0)
    with pytest.raises(ValueError):
        sample_minipatch(rng, 5, 5, 2, 6, 0)


def test_update_counters_examples():
    state = SelectionState.empty(6)
    patch = Minipatch(obs_idx=np.arange(3), node_idx=np.array([1, 4]), k=0)
    update_counters(state, patch, [[1.0, 0.4], [0.4, 1.0]])
    assert state.d_counts[1, 4] == 1 and state.s_counts[1, 4] == 1
    update_counters(state, patch, np.eye(2))
    assert state.d_counts[1, 4] == 2 and state.s_counts[1, 4] == 1
    assert state.d_counts.sum() == 2 and state.patches_done == 2
    with pytest.raises(ValueError):
        update_counters(state, patch, np.eye(3))


def test_six_node_patch_increments_fifteen_pairs():
    state = SelectionState.empty(20)
    nodes = np.sort(np.random.default_rng(3).choice(20, 6, replace=False))
    update_counters(state, Minipatch(np.arange(2), nodes, 0), np.eye(6))
    assert state.d_counts.sum() == 15
    assert np.all(np.tril(state.d_counts) == 0)


def test_frequency_examples():
    state = SelectionState.empty(3)
    state.s_counts[0, 1], state.d_counts[0, 1] = 2, 4
    freq = selection_frequencies(state)
    assert freq[0, 1] == 0.5
    assert freq[0, 2] == 0.0 and freq[1, 2] == 0.0


@st.composite
def counter_states(draw):
    M = draw(st.integers(2, 8))
    d = np.triu(np.array(draw(st.lists(st.integers(0, 20), min_size=M * M, max_size=M * M))).reshape(M, M), 1)
    frac = np.array(draw(st.lists(st.floats(0, 1), min_size=M * M, max_size=M * M))).reshape(M, M)
    s = np.floor(frac * d).astype(np.int64)
    return SelectionState(s_counts=s, d_counts=d.astype(np.int64))


@given(counter_states())
def test_frequency_formula(state):
    freq = selection_frequencies(state)
    M = state.s_counts.shape[0]
    for i in range(M):
        for j in range(M):
            if i < j:
                expected = state.s_counts[i, j] / max(1, state.d_counts[i, j])
                assert freq[i, j] == expected
            else:
                assert freq[i, j] == 0.0
    assert np.all((freq >= 0) & (freq <= 1))


@given(counter_states(), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_stable_set_monotone_in_threshold(state, a, b):
    lo, hi = min(a, b), max(a, b)
    freq = selection_frequencies(state)
    assert set(stable_edge_set(freq, hi)) <= set(stable_edge_set(freq, lo))
    expected = {(i, j) for i, j in zip(*np.nonzero(freq)) if freq[i, j] >= hi}
    assert set(stable_edge_set(freq, hi)) == expected


def test_coverage_examples():
    with pytest.warns(UserWarning):
        rep = coverage_diagnostics(MPGraphConfig(n=63, m=50, K=1000), 1000)
    assert rep.expected_cosamples == pytest.approx(1000 * 50 * 49 / (1000 * 999))
    assert rep.expected_cosamples == pytest.approx(2.452, abs=1e-3)
    assert rep.warning
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert coverage_diagnostics(MPGraphConfig(n=10, m=20, K=300), 20).expected_cosamples == 300
    with pytest.warns(UserWarning):
        assert coverage_diagnostics(MPGraphConfig(n=10, m=20, K=0), 20).expected_cosamples == 0


def test_coverage_matches_simulation():
    config = MPGraphConfig(n=4, m=5, K=2000, master_seed=3)
    expected = coverage_diagnostics(config, 40).expected_cosamples  # 25.6
    together = 0
    for k in range(config.K):
        nodes = sample_minipatch(iteration_rng(3, k), 10, 40, 4, 5, k).node_idx
        together += 0 in nodes and 1 in nodes
    assert abs(together - expected) <= 4 * np.sqrt(expected)


def test_resolve_patch_size():
    assert resolve_patch_size(500, 1000) == (63, 50)
    assert resolve_patch_size(500, 1000, m=40) == (50, 40)
    assert resolve_patch_size(500, 1000, n=20, m_frac=None) == (20, 16)
    assert resolve_patch_size(100, 10) == (3, 2)
    with pytest.warns(UserWarning):
        assert resolve_patch_size(10, 1000, m_frac=0.5) == (10, 500)


def test_single_full_patch_equals_base_estimator():
    X = _chain_data(60, 8)
    result = run_mpgraph(X, MPGraphConfig(n=60, m=8, K=1))
    T = fit_thresholded(X)
    expected = (np.triu(T, 1) != 0).astype(float)
    assert np.array_equal(result.frequencies, expected)
    assert set(np.unique(result.frequencies)) <= {0.0, 1.0}


@pytest.mark.parametrize("workers", [2, 8])
def test_parallel_runs_are_identical(workers):
    X = _chain_data(50, 20, seed=4)
    serial = run_mpgraph(X, MPGraphConfig(n=12, m=8, K=60, master_seed=9))
    par = run_mpgraph(X, MPGraphConfig(n=12, m=8, K=60, master_seed=9, workers=workers))
    assert np.array_equal(serial.state.s_counts, par.state.s_counts)
    assert np.array_equal(serial.state.d_counts, par.state.d_counts)
    assert serial.frequencies.tobytes() == par.frequencies.tobytes()
    assert serial.stable_edges == par.stable_edges


def test_serial_reference_loop_matches_engine():
    X = _chain_data(50, 20, seed=2)
    config = MPGraphConfig(n=12, m=8, K=40, master_seed=5, workers=2)
    result = run_mpgraph(X, config)
    s, d = replay_counters(X, config)
    assert np.array_equal(result.state.s_counts, s)
    assert np.array_equal(result.state.d_counts, d)


def test_log_replay_and_counter_soundness():
    X = _chain_data(40, 15, seed=1)
    config = MPGraphConfig(n=10, m=6, K=50, master_seed=2)
    buf = io.StringIO()
    result = run_mpgraph(X, config, log=buf)
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r["k"] for r in records] == list(range(50))
    s = np.zeros((15, 15), dtype=np.int64)
    d = np.zeros((15, 15), dtype=np.int64)
    for r in records:
        nodes = r["nodes"]
        before = d.sum()
        for p in range(len(nodes)):
            for q in range(p + 1, len(nodes)):
                d[nodes[p], nodes[q]] += 1
        assert d.sum() - before == 15
        for i, j in r["edges"]:
            s[i, j] += 1
        assert r["edge_count"] == len(r["edges"])
    assert np.array_equal(s, result.state.s_counts)
    assert np.array_equal(d, result.state.d_counts)
    assert np.all((0 <= s) & (s <= d) & (d <= config.K))


def test_stable_edges_are_exactly_thresholded_frequencies():
    X = _chain_data(80, 12)
    result = run_mpgraph(X, MPGraphConfig(n=20, m=6, K=100, pi_thr=0.4))
    F = result.frequencies
    expected = [(i, j) for i in range(12) for j in range(i + 1, 12) if F[i, j] >= 0.4]
    assert result.stable_edges == expected
    assert result.stable_edges_at(0.9) == [e for e in expected if F[e] >= 0.9]


def test_run_validates_inputs():
    X = np.random.default_rng(0).standard_normal((10, 5))
    with pytest.raises(ValueError):
        run_mpgraph(X, MPGraphConfig(n=11, m=2, K=1))
    with pytest.raises(ValueError):
        run_mpgraph(X, MPGraphConfig(n=3, m=6, K=1))
    X[2, 3] = np.nan
    with pytest.raises(ValueError, match="row 2, column 3"):
        run_mpgraph(X, MPGraphConfig(n=3, m=2, K=1))
    with pytest.raises(ValueError):
        MPGraphConfig(n=3, m=2, pi_thr=1.0)


def test_constant_columns_are_skipped_not_fatal():
    X = np.random.default_rng(0).standard_normal((20, 4))
    X[:, 0] = 1.0
    result = run_mpgraph(X, MPGraphConfig(n=5, m=2, K=30))
    assert result.state.skipped > 0
    assert result.state.patches_done + result.state.skipped == 30


def test_null_data_mostly_empty_with_defaults():
    empty = 0
    for seed in range(10):
        X = np.random.default_rng(seed).standard_normal((100, 10))
        empty += run_mpgraph(X, MPGraphConfig(n=3, m=2, K=1000, master_seed=seed)).stable_edges == []
    assert empty >= 9


@pytest.mark.slow
@pytest.mark.xfail(
    strict=True,
    reason="with K=200 and 2-node patches each pair is co-sampled only ~4 times, "
    "so frequencies of 1/4 .. 4/4 cross 0.5 easily; empty sets occur in ~45% of seeds",
)
def test_null_data_empty_with_k200():
    empty = 0
    for seed in range(40):
        X = np.random.default_rng(seed).standard_normal((100, 10))
        empty += run_mpgraph(X, MPGraphConfig(n=3, m=2, K=200, master_seed=seed)).stable_edges == []
    assert empty >= 0.95 * 40
