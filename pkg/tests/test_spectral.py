import numpy as np
import pytest
from conftest import random_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from graphonsp import (
    SBM,
    Constant,
    DomainError,
    ExpDistance,
    Graph,
    GraphonSignal,
    Step,
    ValidationError,
    eigendecompose,
    eigengap_set,
    graphon_eigs,
    induced_signal,
    iwft,
    lemma1_bridge_check,
    subspace_project,
    wft,
)
from graphonsp.spectral import (
    projection_distance,
    step_distance,
    step_inner,
    wft_residual,
)


def _q(f, g):
    return np.mean(f * g)


def test_constant_spectrum():
    b = graphon_eigs(Constant(0.3), N=50, k=None)
    assert np.isclose(b.eigval(1), 0.3)
    assert np.allclose(b.eigfunc(1), 1.0)
    others = np.delete(b.eigvals, b.position(1))
    assert np.max(np.abs(others)) < 1e-12


def test_sbm_spectrum():
    b = graphon_eigs(SBM.balanced(0.8, 0.2), N=100, k=5)
    # oracle: eigenvalues of B/2 for the 2x2 block matrix
    ref = np.sort(np.linalg.eigvalsh(np.array([[0.8, 0.2], [0.2, 0.8]]) / 2))[::-1]
    assert np.allclose([b.eigval(1), b.eigval(2)], ref, atol=1e-12)
    assert np.allclose(ref, [0.5, 0.3])


def test_exp_resolution_self_oracle():
    lo = graphon_eigs(ExpDistance(2.3), N=500, k=5)
    hi = graphon_eigs(ExpDistance(2.3), N=4000, k=5)
    for j in range(1, 6):
        assert abs(lo.eigval(j) - hi.eigval(j)) < 1e-3


def test_discretization_convergence_monotone():
    Ns = [125, 250, 500, 1000, 2000]
    bases = [graphon_eigs(ExpDistance(2.3), N=N, k=3) for N in Ns]
    for j in (1, 2, 3):
        diffs = [abs(a.eigval(j) - b.eigval(j)) for a, b in zip(bases[:-1], bases[1:])]
        assert all(d2 <= d1 for d1, d2 in zip(diffs[:-1], diffs[1:])), diffs


def test_step_eigs_are_scaled_block_eigs(rng):
    B = rng.random((6, 6))
    B = (B + B.T) / 2
    b = graphon_eigs(Step(B), N=6, k=None)
    ref = eigendecompose(Graph(B))
    assert np.array_equal(b.indices, ref.indices)
    assert np.allclose(b.eigvals, ref.eigvals / 6, atol=1e-15)


def test_eigfunc_orthonormal():
    b = graphon_eigs(ExpDistance(2.3), N=400, k=10)
    G = b.eigfuncs.T @ b.eigfuncs / b.N
    assert np.max(np.abs(G - np.eye(b.size))) <= 1e-8


def test_k_too_large():
    with pytest.raises(DomainError):
        graphon_eigs(Constant(0.5), N=10, k=11)
    with pytest.raises(DomainError):
        graphon_eigs(Constant(0.5), N=1)


def test_wft_unit_and_zero():
    b = graphon_eigs(ExpDistance(2.3), N=200, k=5)
    c = wft(b, GraphonSignal(b.eigfunc(1)))
    assert np.isclose(c[b.position(1)], 1)
    assert np.max(np.abs(np.delete(c, b.position(1)))) <= 1e-8
    assert np.all(wft(b, GraphonSignal(np.zeros(200))) == 0)


def test_wft_closed_form_sampled_at_midpoints():
    b = graphon_eigs(ExpDistance(2.3), N=100, k=3)
    f = GraphonSignal.from_function(lambda u: u**2)
    u = (np.arange(100) + 0.5) / 100
    assert np.allclose(wft(b, f), b.eigfuncs.T @ u**2 / 100)


def test_iwft_round_trip(rng):
    b = graphon_eigs(ExpDistance(2.3), N=300, k=6)
    c = rng.standard_normal(b.size)
    assert np.max(np.abs(wft(b, iwft(b, c)) - c)) <= 1e-8
    assert np.all(iwft(b, np.zeros(b.size)).values == 0)
    e = np.zeros(b.size)
    e[b.position(2)] = 2.5
    assert np.allclose(iwft(b, e).values, 2.5 * b.eigfunc(2))


def test_residual_energy_reported():
    b = graphon_eigs(ExpDistance(2.3), N=200, k=2)
    phi = GraphonSignal.from_function(lambda u: np.sin(20 * u))
    r = wft_residual(b, phi)
    c = wft(b, phi)
    assert r > 0
    assert np.isclose(r + np.sum(c**2), np.mean(np.sin(20 * (np.arange(200) + 0.5) / 200) ** 2))


def test_induced_signal_cases(rng):
    assert np.all(induced_signal(3, 2.0 * np.ones(3)).refine(30).values == 2.0)
    s = induced_signal(2, [1.0, 0.0])
    assert s(0.25) == 1.0 and s(0.75) == 0.0
    x = rng.standard_normal(9)
    assert np.isclose(induced_signal(9, x).norm ** 2, x @ x / 9)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 64), st.integers(0, 2**32 - 1))
def test_lemma1_exact(n, seed):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, n, weighted=bool(seed % 2))
    rep = lemma1_bridge_check(G, rng.standard_normal(n))
    assert rep["max_eigval_gap"] <= 1e-10
    assert rep["max_wft_gap"] <= 1e-10


def test_lemma1_empty_graph():
    rep = lemma1_bridge_check(Graph(np.zeros((5, 5))), np.arange(5.0))
    assert rep["max_eigval_gap"] == 0 and rep["max_wft_gap"] <= 1e-12


def test_lemma1_k3_hand_computed():
    # K_3: eigenvalue 2 with v = 1/sqrt(3); x = e_1 has x_hat_1 = 1/sqrt(3)
    G = Graph(np.ones((3, 3)) - np.eye(3))
    gb = graphon_eigs(Step(G.S), N=3, k=None)
    assert np.isclose(gb.eigval(1), 2 / 3)
    phat = wft(gb, induced_signal(G, [1.0, 0.0, 0.0]))
    assert np.isclose(phat[gb.position(1)], 1 / np.sqrt(3) / np.sqrt(3))
    rep = lemma1_bridge_check(G, [1.0, 0.0, 0.0])
    assert rep["max_eigval_gap"] <= 1e-12 and rep["max_wft_gap"] <= 1e-12


def test_lemma1_refined_grid(rng):
    G = random_graph(rng, 7)
    rep = lemma1_bridge_check(G, rng.standard_normal(7), refine=3)
    assert rep["max_eigval_gap"] <= 1e-10 and rep["max_wft_gap"] <= 1e-10


def test_subspace_projection_properties(rng):
    b = graphon_eigs(ExpDistance(2.3), N=200, k=6)
    phi = GraphonSignal(rng.standard_normal(200))
    P = subspace_project(b, [1, 2, 4], phi)
    PP = subspace_project(b, [1, 2, 4], P)
    assert np.max(np.abs(P.values - PP.values)) <= 1e-8
    assert P.norm <= phi.norm + 1e-12
    psi = GraphonSignal(rng.standard_normal(200))
    Q = subspace_project(b, [1, 2, 4], psi)
    assert abs(_q(P.values, psi.values) - _q(phi.values, Q.values)) <= 1e-8
    assert np.all(subspace_project(b, [], phi).values == 0)
    with pytest.raises(KeyError):
        subspace_project(b, [50], phi)


def test_subspace_full_cluster_is_bandlimited_part(rng):
    b = graphon_eigs(ExpDistance(2.3), N=100, k=4)
    phi = GraphonSignal(rng.standard_normal(100))
    full = subspace_project(b, list(b.indices), phi)
    assert np.allclose(full.values, iwft(b, wft(b, phi)).values)


def test_eigengap_set():
    sel, _ = eigengap_set(graphon_eigs(Constant(0.4), N=40, k=None), 0.2)
    assert sel == [1]
    sel, gap = eigengap_set(graphon_eigs(Constant(0.4), N=40, k=None), 0.5)
    assert sel == [] and gap == np.inf
    sel, gap = eigengap_set(graphon_eigs(SBM.balanced(0.8, 0.2), N=40, k=None), 0.4)
    assert sel == [1] and np.isclose(gap, 0.2)


def test_step_geometry_exact():
    # [1, 0] on halves vs [1, 1, 0] on thirds: differ on (1/2, 2/3), length 1/6
    assert np.isclose(step_distance([1.0, 0.0], [1.0, 1.0, 0.0]), np.sqrt(1 / 6))
    assert np.isclose(step_inner(np.array([1.0, 2.0]), np.array([3.0, 3.0, 3.0])), 4.5)


def test_projection_distance_principal_angle():
    N = 4
    e = np.sqrt(N) * np.eye(N)
    assert np.isclose(projection_distance(e[:, :1], e[:, :1]), 0, atol=1e-12)
    assert np.isclose(projection_distance(e[:, :1], e[:, 1:2]), 1)
    mix = (e[:, 0] * np.cos(0.3) + e[:, 1] * np.sin(0.3))[:, None]
    assert np.isclose(projection_distance(e[:, :1], mix), np.sin(0.3))
    assert projection_distance(e[:, :2], e[:, :1]) == 1.0


def test_prop2_sbm_subspace_trend():
    from graphonsp.experiments import trend_ok
    from graphonsp.graphon import sample_graph_sequence

    W = SBM.balanced(0.8, 0.2)
    gb = graphon_eigs(W, N=800, k=2)
    F = gb.eigfuncs[:, [gb.position(1), gb.position(2)]]
    ns = [100, 200, 400, 800]
    vals = np.zeros((10, len(ns)))
    for s in range(10):
        for c, (lab, G) in enumerate(sample_graph_sequence(W, ns, np.random.default_rng(s))):
            order = np.argsort(lab.u, kind="stable")
            sb = eigendecompose(G.permute(order))
            H = sb.eigvecs[:, [sb.position(1), sb.position(2)]] * np.sqrt(G.n)
            vals[s, c] = projection_distance(H, F)
    assert trend_ok(vals.mean(axis=0)), vals.mean(axis=0)


def test_grid_signal_resolution_mismatch():
    b = graphon_eigs(Constant(0.5), N=10, k=1)
    with pytest.raises(ValidationError):
        wft(b, GraphonSignal(np.ones(7)))
