"""One spectral filter applied to graphs of growing size and to the graphon.

A Lipschitz lowpass is applied to the pollution signal on sampled SBM graphs
and on the SBM graphon itself; the L2 gap between the induced graph output and
the graphon output shrinks with n.
"""

import numpy as np

from graphonsp import (
    GraphonSignal,
    apply_graphon_filter,
    apply_spectral_graph_filter,
    eigendecompose,
    graphon_eigs,
    lowpass,
    parse_graphon_spec,
    sample_graph,
)
from graphonsp.experiments import pollution_signal
from graphonsp.spectral import step_distance

rng = np.random.default_rng(1)
W = parse_graphon_spec("sbm2:0.8,0.2")
h = lowpass(0.2, 0.1)
basis = graphon_eigs(W, N=2000, k=None)
phi = GraphonSignal.from_function(pollution_signal, "pollution")
gamma = apply_graphon_filter(basis, h, phi).values

for n in (100, 200, 400, 800):
    gaps = []
    for _ in range(5):
        u = np.sort(rng.random(n))
        G = sample_graph(W, u, "bernoulli", rng)
        y = apply_spectral_graph_filter(eigendecompose(G), h, pollution_signal(u))
        gaps.append(step_distance(y, gamma))
    print(f"n={n:<4d} mean output gap {np.mean(gaps):.4f}")
