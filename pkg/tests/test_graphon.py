import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from graphonsp import (
    SBM,
    Constant,
    DomainError,
    ExpDistance,
    Graph,
    GridSampled,
    Step,
    ValidationError,
    discretize,
    induced_graphon,
    parse_graphon_spec,
    sample_graph,
    sample_latents,
)
from graphonsp.graphon import load_step_csv, sample_graph_sequence, save_step_csv

unit = st.floats(0.0, 1.0, allow_nan=False)


# eval ------------------------------------------------------------------------


def test_constant_eval():
    W = Constant(0.4)
    assert W(0.1, 0.9) == 0.4
    assert np.all(W(np.linspace(0, 1, 7), 0.3) == 0.4)


def test_expdistance_diagonal_is_one():
    assert ExpDistance(2.3)(0.37, 0.37) == 1.0


def test_sbm_cross_block_value():
    W = SBM((0.5, 1.0), [[0.8, 0.2], [0.2, 0.8]])
    assert W(0.25, 0.75) == 0.2
    assert W(0.25, 0.4) == 0.8
    assert W(0.6, 1.0) == 0.8


def test_eval_outside_unit_interval_is_domain_error():
    with pytest.raises(DomainError):
        Constant(0.5)(1.2, 0.3)
    with pytest.raises(DomainError):
        ExpDistance(1.0)(-0.01, 0.3)
    with pytest.raises(DomainError):
        Step(np.eye(2))(0.5, np.nan)


def test_sbm_validation():
    with pytest.raises(ValidationError):
        SBM((0.6, 0.5, 1.0), np.full((3, 3), 0.1))
    with pytest.raises(ValidationError):
        SBM((0.5, 0.9), np.full((2, 2), 0.1))
    with pytest.raises(ValidationError):
        SBM((0.5, 1.0), [[0.8, 0.1], [0.2, 0.8]])


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_symmetry_and_range(u, v):
    for W in (Constant(0.3), SBM.balanced(0.8, 0.2, 3), ExpDistance(2.3), ExpDistance(2.3, power=1),
              Step([[0.1, 0.9], [0.9, 0.5]])):
        a, b = W(u, v), W(v, u)
        assert a == b
        assert 0.0 <= a <= 1.0


def test_symmetry_on_many_random_pairs(rng):
    u, v = rng.random(10_000), rng.random(10_000)
    for W in (SBM.balanced(0.8, 0.2), ExpDistance(2.3), Step(rng.random((4, 4)) * 0 + 0.5)):
        assert np.max(np.abs(W(u, v) - W(v, u))) == 0


def test_step_partition_is_right_open_with_closed_last_block():
    W = Step([[0.0, 1.0], [1.0, 0.5]])
    assert W(0.5, 0.0) == 1.0  # 0.5 starts the second block
    assert W(0.4999, 0.0) == 0.0
    assert W(1.0, 1.0) == 0.5


# induced graphon --------------------------------------------------------------


def test_induced_two_node():
    W = induced_graphon(Graph([[0, 1], [1, 0]]))
    assert W(0.1, 0.7) == 1.0 and W(0.7, 0.1) == 1.0
    assert W(0.1, 0.2) == 0.0 and W(0.8, 0.9) == 0.0


def test_induced_single_node_is_zero():
    W = induced_graphon(Graph([[0.0]]))
    assert W.n_blocks == 1 and W(0.3, 0.9) == 0.0


def test_induced_path_block_arithmetic():
    # 0.1 -> block 0, 0.5 -> block 1, 0.9 -> block 2
    W = induced_graphon(Graph([[0, 1, 0], [1, 0, 1], [0, 1, 0]]))
    assert W(0.1, 0.5) == 1.0
    assert W(0.1, 0.9) == 0.0


def test_invalid_graph_rejected():
    with pytest.raises(ValidationError):
        induced_graphon(np.array([[0, 1], [0.5, 0]]))
    with pytest.raises(ValidationError):
        Graph([[0, 2], [2, 0]])


# latents ------------------------------------------------------------------------


def test_regular_grid_midpoints():
    assert np.allclose(sample_latents(3, "regular_grid").u, [1 / 6, 1 / 2, 5 / 6])


def test_uniform_latents_deterministic():
    a = sample_latents(50, "uniform_iid", np.random.default_rng(7)).u
    b = sample_latents(50, "uniform_iid", np.random.default_rng(7)).u
    assert np.array_equal(a, b)


def test_uniform_latents_mean():
    u = sample_latents(10_000, "uniform_iid", np.random.default_rng(3)).u
    assert abs(u.mean() - 0.5) < 0.02
    assert u.min() >= 0 and u.max() <= 1


def test_zero_latents_is_domain_error():
    with pytest.raises(DomainError):
        sample_latents(0, "regular_grid")


# sampling ------------------------------------------------------------------------


def test_complete_and_empty_samples(rng):
    lab = sample_latents(20, "uniform_iid", rng)
    K = sample_graph(Constant(1.0), lab, "bernoulli", rng)
    assert np.array_equal(K.S, np.ones((20, 20)) - np.eye(20))
    for mode in ("bernoulli", "weighted"):
        assert not np.any(sample_graph(Constant(0.0), lab, mode, rng).S)


def test_weighted_sample_matches_kernel(rng):
    lab = sample_latents(30, "uniform_iid", rng)
    G = sample_graph(ExpDistance(2.3), lab, "weighted")
    expected = ExpDistance(2.3).kernel(lab.u)
    np.fill_diagonal(expected, 0)
    assert np.allclose(G.S, expected, atol=0, rtol=1e-15)


def test_sbm_edge_density():
    dens = []
    for s in range(5):
        rng = np.random.default_rng(s)
        lab = sample_latents(2000, "uniform_iid", rng)
        dens.append(sample_graph(SBM.balanced(0.8, 0.2), lab, "bernoulli", rng).edge_density())
    assert abs(np.mean(dens) - 0.5) < 0.02


def test_bernoulli_reproducible():
    def draw():
        rng = np.random.default_rng(99)
        return sample_graph(ExpDistance(2.3), sample_latents(80, "uniform_iid", rng), "bernoulli", rng).S

    assert draw().tobytes() == draw().tobytes()


def test_edge_density_converges_to_integral():
    # oracle: quadrature of the closed form; estimator: density of bernoulli samples
    W = ExpDistance(2.3)
    integral, _ = integrate.dblquad(lambda v, u: W(u, v), 0, 1, 0, 1)
    n, reps = 300, 20
    ests = []
    for s in range(reps):
        rng = np.random.default_rng(1000 + s)
        G = sample_graph(W, sample_latents(n, "uniform_iid", rng), "bernoulli", rng)
        ests.append(G.S.sum() / (n * (n - 1)))  # the zero diagonal is not a sampled pair
    ests = np.array(ests)
    se = ests.std(ddof=1) / np.sqrt(reps)
    assert abs(ests.mean() - integral) < 3 * se


def test_nested_sequence_is_induced():
    seq = sample_graph_sequence(SBM.balanced(0.8, 0.2), [10, 20, 40], np.random.default_rng(5))
    _, G40 = seq[-1]
    for lab, G in seq:
        n = G.n
        assert np.array_equal(G.S, G40.S[:n, :n])
        assert np.array_equal(lab.u, seq[-1][0].u[:n])
        assert np.all(np.diag(G.S) == 0)


# discretize ------------------------------------------------------------------------


def test_discretize_constant():
    assert np.array_equal(discretize(Constant(0.3), 5).B, np.full((5, 5), 0.3))


def test_discretize_step_refinement_exact(rng):
    B = rng.random((3, 3))
    B = (B + B.T) / 2
    D = discretize(Step(B), 3 * 4).B
    assert np.array_equal(D, np.kron(B, np.ones((4, 4))))


def test_discretize_exp_corners():
    D = discretize(ExpDistance(2.3), 100)
    assert isinstance(D, GridSampled) and D.N == 100
    assert D.B.max() == 1.0 and np.all(np.diag(D.B) == 1.0)
    assert np.isclose(D.B.min(), np.exp(-2.3 * 0.99**2), rtol=1e-14)
    assert np.array_equal(D.B, D.B.T)


def test_discretize_needs_two_cells():
    with pytest.raises(DomainError):
        discretize(Constant(0.5), 1)


# serialization ---------------------------------------------------------------------


def test_spec_round_trip():
    for text in ("er:0.4", "exp:2.3", "srgg:2.3", "sbm:0.5,1.0;0.8,0.2,0.2,0.8"):
        W = parse_graphon_spec(text)
        assert parse_graphon_spec(W.spec).spec == W.spec
    assert parse_graphon_spec("sbm2:0.8,0.2")(0.1, 0.9) == 0.2


def test_bad_spec():
    for bad in ("nope:1", "er", "er:x", "sbm:0.5;0.1"):
        with pytest.raises(ValidationError):
            parse_graphon_spec(bad)


def test_step_csv_round_trip(tmp_path, rng):
    B = rng.random((4, 4))
    B = (B + B.T) / 2
    save_step_csv(Step(B), tmp_path / "b.csv")
    assert np.array_equal(load_step_csv(tmp_path / "b.csv").B, B)
    W = parse_graphon_spec("step:b.csv", base_dir=tmp_path)
    assert np.array_equal(W.B, B)


def test_sbm_boundaries_follow_step_convention():
    W = SBM.balanced(0.8, 0.2)
    assert W(0.5, 0.0) == 0.2 and W(0.4999, 0.0) == 0.8 and W(1.0, 0.5) == 0.8
