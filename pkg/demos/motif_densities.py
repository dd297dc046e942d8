"""Triangle and edge densities of sampled graphs against the graphon values."""

import numpy as np

from graphonsp import (
    Motif,
    cycle_density_graph,
    hom_density_graphon,
    parse_graphon_spec,
    sample_graph,
    sample_latents,
)

rng = np.random.default_rng(2)
W = parse_graphon_spec("sbm2:0.8,0.2")
tri = hom_density_graphon(Motif.cycle(3), W)[0]
edge = hom_density_graphon(Motif.edge(), W)[0]
print(f"graphon   edge {edge:.4f}  triangle {tri:.4f}")
for n in (25, 100, 400):
    G = sample_graph(W, sample_latents(n, rng=rng), "bernoulli", rng)
    print(f"n={n:<6d} edge {G.S.sum() / n**2:.4f}  triangle {cycle_density_graph(3, G):.4f}")
