import json

import numpy as np
import pytest
from conftest import random_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from graphonsp import (
    DomainError,
    Graph,
    NumericalError,
    ValidationError,
    eigendecompose,
    gft,
)
from graphonsp.experiments import (
    ConvergenceReport,
    ExperimentConfig,
    check_trends,
    default_config,
    derive_rng,
    exp_eigconv,
    exp_filter_transfer,
    exp_gmrf,
    exp_pollution,
    gft_difference,
    gmrf_covariance,
    gmrf_sample,
    nearest_rank_quantile,
    pollution_signal,
    run_experiment,
    trend_ok,
    write_outputs,
)
from graphonsp.graphon import ExpDistance, discretize, sample_graph, sample_latents
from graphonsp.spectral import step_distance

# signals and alignment ----------------------------------------------------------


def test_pollution_signal_values():
    assert pollution_signal(0.0) == 1.0
    assert np.isclose(pollution_signal(0.2, 0.2), np.exp(-0.5))
    u = (np.arange(10) + 0.5) / 10
    assert np.allclose(pollution_signal(u, 0.3), [np.exp(-x * x / 0.18) for x in u])
    with pytest.raises(DomainError):
        pollution_signal(0.1, 0.0)


def test_gft_difference_same_graph_is_zero(rng):
    G = random_graph(rng, 12)
    u = rng.random(12)
    b = eigendecompose(G)
    c = gft(b, pollution_signal(u))
    assert gft_difference(b, c, b, c) == 0
    assert gft_difference(b, c, b, -c) == 0  # eigenvector signs are resolved
    assert gft_difference(b, c, b, c, "magnitude") == 0


def test_gft_difference_missing_index_counts_as_zero():
    b1 = eigendecompose(Graph([[0, 1], [1, 0]]))  # indices 1, -1
    b2 = eigendecompose(Graph(np.zeros((2, 2))))  # indices 1, 2
    c1 = np.array([3.0, 4.0])
    c2 = np.array([3.0, 1.0])
    # union {1, 2, -1}: |3-3|, |0-1|, |4-0|
    assert np.isclose(gft_difference(b1, c1, b2, c2), np.sqrt(17) / 5)
    # sorted magnitudes [4, 3] against [3, 1]
    assert np.isclose(gft_difference(b1, c1, b2, c2, "magnitude"), np.sqrt(5) / 5)


def test_gft_difference_zero_reference():
    b = eigendecompose(Graph(np.zeros((2, 2))))
    with pytest.raises(DomainError):
        gft_difference(b, np.zeros(2), b, np.ones(2))


# GMRF -------------------------------------------------------------------------------


def test_gmrf_degenerate_cases(rng):
    S = random_graph(rng, 5).S
    assert np.allclose(gmrf_covariance(S, a0=2.0, a=0.0), 4 * np.eye(5))
    assert not np.any(gmrf_covariance(S, a0=0.0, a=0.1))


def test_gmrf_neumann_oracle(rng):
    S = random_graph(rng, 4).S
    a = 0.1
    M = sum(a**k * np.linalg.matrix_power(S, k) for k in range(60))
    assert np.max(np.abs(gmrf_covariance(S, 1.0, a) - M @ M.T)) <= 1e-6


def test_gmrf_default_a_and_singular(rng):
    S = random_graph(rng, 6).S
    lam = np.linalg.eigvalsh(S)[-1]
    assert np.allclose(gmrf_covariance(S), gmrf_covariance(S, 1.0, 0.9 / lam))
    with pytest.raises(NumericalError):
        gmrf_covariance(S, 1.0, 1.0 / lam)
    C = gmrf_covariance(S)
    assert np.all(np.linalg.eigvalsh(C) > 0)


def test_gmrf_sample_identity_and_repro():
    x = gmrf_sample(np.eye(3), np.random.default_rng(4), size=20_000)
    assert np.allclose(x.mean(axis=0), 0, atol=0.03) and np.allclose(x.std(axis=0), 1, atol=0.03)
    a = gmrf_sample(np.eye(3), np.random.default_rng(9))
    b = gmrf_sample(np.eye(3), np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_gmrf_sample_empirical_covariance():
    C = np.array([[2.0, 0.6], [0.6, 0.5]])
    m = 10_000
    x = gmrf_sample(C, np.random.default_rng(11), size=m)
    emp = x.T @ x / m
    # standard error of a sample covariance entry: sqrt((C_ii C_jj + C_ij^2) / m)
    se = np.sqrt((np.outer(np.diag(C), np.diag(C)) + C**2) / m)
    assert np.all(np.abs(emp - C) <= 4 * se)


def test_gmrf_same_labels_on_grid_is_discretization_error():
    # regular grid at n = N with weighted sampling: y_n and y_W differ only by the zero diagonal
    N = 200
    W = ExpDistance(2.3)
    SW = discretize(W, N).B
    x = np.linalg.cholesky(gmrf_covariance(SW / N)) @ np.random.default_rng(0).standard_normal(N)
    G = sample_graph(W, sample_latents(N, "regular_grid"), "weighted")
    yW = SW @ x / N
    gap = np.linalg.norm(G.S @ x / N - yW) / np.linalg.norm(yW)
    assert np.isclose(gap, np.linalg.norm(x / N) / np.linalg.norm(yW), rtol=1e-10)


def test_gmrf_a0_zero_rejected():
    with pytest.raises(DomainError):
        exp_gmrf(default_config("gmrf", a0=0.0, n_list=(10,), reps=1, N=50))


# quantiles and trends -----------------------------------------------------------


def test_nearest_rank_examples():
    x = np.arange(1, 11)
    assert nearest_rank_quantile(x, 0.68) == 7
    assert nearest_rank_quantile(x, 0.95) == 10
    assert nearest_rank_quantile(x, 0.5) == 5
    assert nearest_rank_quantile([4.0], 0.997) == 4.0
    with pytest.raises(ValidationError):
        nearest_rank_quantile([], 0.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_quantiles_monotone(x):
    q = [nearest_rank_quantile(x, p) for p in (0.68, 0.95, 0.997)]
    assert q[0] <= q[1] <= q[2]
    assert q[2] <= max(x) and q[0] >= min(x)


def test_trend_rule():
    assert trend_ok([4, 3, 2, 1])
    assert trend_ok([4, 3, 3.2, 1])  # one 6.7% violation
    assert not trend_ok([4, 3, 3.5, 1])  # 16.7%
    assert not trend_ok([4, 3, 3.1, 3.0, 3.05])  # two violations
    assert trend_ok([4, 3, 3.5, 1], tol=0.2)


def test_summary_quantiles_monotone():
    rows = [(n, s, float(v)) for n in (10, 20) for s, v in enumerate(np.random.default_rng(0).random(30))]
    rep = ConvergenceReport("t", ("n", "seed"), ("m",), rows)
    for rec in rep.summary():
        assert rec["q68"] <= rec["q95"] <= rec["q997"] and rec["count"] == 30


# seeding and configuration --------------------------------------------------------


def test_derive_rng_streams():
    a = derive_rng(0, 1, 50, 3).random(5)
    assert np.array_equal(a, derive_rng(0, 1, 50, 3).random(5))
    for other in ((1, 1, 50, 3), (0, 2, 50, 3), (0, 1, 51, 3), (0, 1, 50, 4)):
        assert not np.array_equal(a, derive_rng(*other).random(5))


def test_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig("x", n_list=(20, 10))
    with pytest.raises(ValidationError):
        ExperimentConfig("x", reps=0)
    with pytest.raises(ValidationError):
        ExperimentConfig("x", align="other")
    with pytest.raises(ValidationError):
        default_config("nope")
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"name": "x", "bogus": 1})


def test_config_json_round_trip(tmp_path):
    cfg = default_config("gmrf", master_seed=5, a=0.3)
    cfg.save(tmp_path / "c.json")
    assert ExperimentConfig.load(tmp_path / "c.json") == cfg
    assert json.loads((tmp_path / "c.json").read_text())["graphons"] == list(cfg.graphons)


# experiment runs -------------------------------------------------------------------


def _small(name, **kw):
    base = dict(
        pollution=dict(n_list=(5, 10, 20), reps=4),
        gmrf=dict(n_list=(20, 40), reps=2, N=100),
        eigconv=dict(n_list=(20, 40), reps=2, ref_N=200),
        transfer=dict(n_list=(20, 40), reps=2, N=100),
    )[name]
    return default_config(name, **{**base, **kw})


@pytest.mark.parametrize("name", ["pollution", "gmrf", "eigconv", "transfer"])
def test_runs_are_bit_reproducible(name, tmp_path):
    cfg = _small(name)
    a = write_outputs(run_experiment(cfg), cfg, tmp_path / "a", svg=True)
    b = write_outputs(run_experiment(cfg), cfg, tmp_path / "b", svg=True)
    for key in ("rows", "summary", "config", "svg"):
        assert a[key].read_bytes() == b[key].read_bytes()
    text = a["rows"].read_text().splitlines()
    assert text[0] == "# schema=v1" and text[1] == f"# experiment={name}"
    assert ExperimentConfig.load(a["config"]) == cfg


@pytest.mark.parametrize("name", ["pollution", "gmrf", "transfer"])
@pytest.mark.parametrize("coupling", ["nested", "independent"])
def test_thread_count_does_not_change_results(name, coupling):
    one = run_experiment(_small(name, coupling=coupling, threads=1))
    four = run_experiment(_small(name, coupling=coupling, threads=4))
    assert one.rows == four.rows


def test_report_shapes():
    rep = exp_pollution(_small("pollution"))
    assert rep.keys == ("n", "seed") and len(rep.rows) == 12
    rep = exp_gmrf(_small("gmrf"))
    assert {r[0] for r in rep.rows} == {"er:0.4", "sbm2:0.8,0.2", "exp:2.3"}
    rep = exp_eigconv(_small("eigconv"))
    assert rep.metrics == ("eig_gap", "response_gap") and {r[3] for r in rep.rows} == {1, 2, 3}


def test_eigconv_constant_graphon():
    cfg = default_config("eigconv", graphons=("er:0.5",), n_list=(50, 100, 200, 400), reps=10, ref_N=200, indices=(1, 2))
    rep = exp_eigconv(cfg)
    _, g1 = rep.series("eig_gap", "mean", j=1)
    assert trend_ok(g1)
    _, g2 = rep.series("eig_gap", "mean", j=2)
    # the rank-one limit has lambda_2 = 0; the graph value is the Bernoulli noise edge ~ 1/sqrt(n)
    assert trend_ok(g2) and g2[-1] < 0.06


def test_transfer_identity_filter_is_sampling_error():
    cfg = _small("transfer", filter="identity", subspace_dim=0)
    rep = exp_filter_transfer(cfg)
    # oracle: regenerate the nested labels and measure the signal-sampling error directly
    from graphonsp.graphon import parse_graphon_spec, sample_graph_sequence

    W = parse_graphon_spec(cfg.graphons[0])
    grid = pollution_signal((np.arange(cfg.N) + 0.5) / cfg.N, cfg.sigma)
    for rep_i in range(cfg.reps):
        seq = sample_graph_sequence(W, cfg.n_list, derive_rng(cfg.master_seed, 0, 0, rep_i))
        for n, (lab, _) in zip(cfg.n_list, seq):
            want = step_distance(pollution_signal(np.sort(lab.u), cfg.sigma), grid)
            got = [r[2] for r in rep.rows if r[0] == n and r[1] == rep_i][0]
            assert np.isclose(got, want, rtol=1e-9, atol=1e-12)


def test_transfer_needs_filter():
    with pytest.raises(ValidationError):
        exp_filter_transfer(_small("transfer", filter=None))


def test_check_trends_labels():
    rep = exp_pollution(_small("pollution"))
    labels = [lab for lab, _ in check_trends(rep)]
    assert labels == ["gft_diff median nonincreasing", "gft_diff last median < 0.5 * first"]
    rep = exp_gmrf(_small("gmrf"))
    assert len(check_trends(rep)) == 3 and len(check_trends(rep, "median")) == 3
