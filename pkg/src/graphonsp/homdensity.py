"""Homomorphism densities, the cycle/spectrum identity and cut norms.

Homomorphisms are counted over *all* vertex maps (not only injective ones),
so ``t(C_k, G) = trace(S^k) / n^k = sum_j (lambda_j(S) / n)^k``.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError, ValidationError
from .graph import Graph, SpectralBasis, signed_eigenvalues
from .graphon import SBM, Graphon, Step, discretize
from .spectral import GraphonBasis

__all__ = [
    "Motif",
    "hom_density_graph",
    "hom_density_einsum",
    "cycle_density_graph",
    "hom_density_graphon",
    "cycle_spectral_identity_check",
    "cut_norm_step",
    "l2_operator_norm",
    "read_motif",
    "write_motif",
]

MAX_MOTIF_VERTICES = 8
BRUTE_FORCE_BUDGET = 10**9
_CHUNK = 1 << 18


@dataclass(frozen=True)
class Motif:
    """Simple undirected graph on vertices ``0..n_vertices-1``."""

    n_vertices: int
    edges: tuple
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.n_vertices <= MAX_MOTIF_VERTICES:
            raise ValidationError(f"motifs have 1..{MAX_MOTIF_VERTICES} vertices")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValidationError("motif has a self-loop")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValidationError(f"edge ({i}, {j}) out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))

    @classmethod
    def edge(cls) -> "Motif":
        return cls(2, ((0, 1),), "K2")

    @classmethod
    def cycle(cls, k: int) -> "Motif":
        """``C_k``.  ``C_2`` is the doubled edge, whose density is ``trace(S^2)/n^2``."""
        if k < 2:
            raise DomainError("cycles have length >= 2")
        if k == 2:
            return _C2
        return cls(k, tuple((i, (i + 1) % k) for i in range(k)), f"C{k}")

    @classmethod
    def path(cls, k: int) -> "Motif":
        """Path with ``k`` vertices."""
        return cls(k, tuple((i, i + 1) for i in range(k - 1)), f"P{k}")

    @classmethod
    def complete(cls, k: int) -> "Motif":
        return cls(k, tuple(itertools.combinations(range(k), 2)), f"K{k}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)


class _DoubleEdge(Motif):
    # C_2 as a multigraph: two parallel edges between vertices 0 and 1
    @property
    def n_edges(self) -> int:
        return 2


_C2 = _DoubleEdge(2, ((0, 1),), "C2")


def _edge_list(F: Motif):
    edges = list(F.edges)
    if isinstance(F, _DoubleEdge):
        edges = edges * 2
    return edges


def hom_density_graph(F: Motif, G: Graph, budget: int = BRUTE_FORCE_BUDGET) -> float:
    """``t(F, G)`` by enumerating every map ``V(F) -> V(G)``.

    Maps are enumerated in fixed-size chunks in lexicographic order and the
    partial sums are reduced pairwise, so the result is reproducible.
    """
    n, v = G.n, F.n_vertices
    total_maps = n**v
    if total_maps > budget:
        raise BudgetExceededError(
            f"{n}^{v} = {total_maps} maps exceeds the budget {budget}; "
            "use cycle_density_graph or hom_density_einsum"
        )
    S = G.S
    edges = _edge_list(F)
    partial = []
    for start in range(0, total_maps, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total_maps))
        # digit i of the base-n expansion is the image of motif vertex i
        beta = np.empty((len(flat), v), dtype=np.intp)
        rest = flat
        for i in range(v - 1, -1, -1):
            rest, beta[:, i] = np.divmod(rest, n)
        prod = np.ones(len(flat))
        for a, b in edges:
            prod *= S[beta[:, a], beta[:, b]]
        partial.append(prod.sum())
    while len(partial) > 1:
        partial = [sum(partial[i : i + 2]) for i in range(0, len(partial), 2)]
    return float(partial[0]) / float(total_maps)


def hom_density_einsum(F: Motif, B: np.ndarray, weights=None) -> float:
    """``sum_beta prod_{ij in E} B[beta_i, beta_j] prod_i w[beta_i]`` by tensor contraction.

    With uniform weights ``1/n`` this is ``t(F, G)`` for ``S = B`` and also
    ``t(F, W)`` for the step graphon with block matrix ``B``.
    """
    B = np.asarray(B, dtype=float)
    k = B.shape[0]
    w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
    letters = string.ascii_lowercase
    terms = [f"{letters[a]}{letters[b]}" for a, b in _edge_list(F)]
    terms += [letters[i] for i in range(F.n_vertices)]
    expr = ",".join(terms) + "->"
    operands = [B] * len(_edge_list(F)) + [w] * F.n_vertices
    return float(np.einsum(expr, *operands, optimize="greedy"))


def cycle_density_graph(k: int, G: Graph) -> float:
    """``trace(S^k) / n^k`` by repeated multiplication."""
    if k < 2:
        raise DomainError("cycle length must be >= 2")
    S = G.S / G.n
    P = S.copy()
    for _ in range(k - 1):
        P = P @ S
    return float(np.trace(P))


def hom_density_graphon(
    F: Motif,
    W: Graphon,
    method: str = "step_exact",
    samples: int = 100_000,
    rng=None,
) -> tuple[float, float]:
    """``t(F, W)`` and its standard error (0 for the exact method).

    ``step_exact`` requires a step, grid-sampled or block-model graphon (blocks
    weighted by their widths); ``monte_carlo``
    averages the edge product over i.i.d. uniform vertex positions.
    """
    if method == "step_exact":
        if isinstance(W, SBM):
            widths = np.diff(np.concatenate([[0.0], W.boundaries]))
            return hom_density_einsum(F, W.block_probs, widths), 0.0
        if not W.is_step:
            raise ValidationError("step_exact needs a Step, GridSampled or SBM graphon")
        return hom_density_einsum(F, W.B), 0.0
    if method != "monte_carlo":
        raise ValidationError(f"unknown method {method!r}")
    if rng is None:
        raise ValidationError("monte_carlo needs an explicit generator")
    if samples < 2:
        raise DomainError("need at least two samples")
    U = rng.random((samples, F.n_vertices))
    prod = np.ones(samples)
    for a, b in _edge_list(F):
        prod *= W(U[:, a], U[:, b])
    return float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(samples))


def cycle_spectral_identity_check(k: int, target, basis=None) -> dict:
    """Compare ``t(C_k, .)`` with ``sum_j lambda_j^k``.

    ``target`` is a :class:`Graph` (eigenvalues ``lambda_j(S)/n``) or a step
    graphon; a closed-form graphon is first discretized at the resolution of
    ``basis`` (a complete :class:`GraphonBasis`) or at 1000 cells.
    """
    if k < 2:
        raise DomainError("cycle length must be >= 2")
    if isinstance(target, Graph):
        density = cycle_density_graph(k, target)
        if basis is None:
            _, lam = signed_eigenvalues(target.S)
            lam = lam / target.n
        else:
            lam = basis.eigvals / basis.n
    else:
        if basis is not None and not (isinstance(basis, GraphonBasis) and basis.is_complete):
            raise ValidationError("the identity needs the complete spectrum")
        if not target.is_step:
            target = discretize(target, basis.N if basis is not None else 1000)
        N = target.n_blocks
        density = cycle_density_graph(k, _graph_unchecked(target.B))
        if basis is None:
            _, lam = signed_eigenvalues(target.B)
            lam = lam / N
        else:
            lam = basis.eigvals
    spectral = float(np.sum(lam**k))
    return {"k": k, "density": density, "spectral_sum": spectral, "gap": abs(density - spectral)}


class _graph_unchecked:
    # lightweight stand-in so cycle_density_graph can run on any symmetric matrix
    def __init__(self, S):
        self.S = np.asarray(S, dtype=float)
        self.n = self.S.shape[0]


def _signed_matrix(D) -> np.ndarray:
    B = D.B if isinstance(D, Step) else np.asarray(D, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError("cut norm needs a square block matrix")
    if not np.allclose(B, B.T, rtol=0, atol=0):
        raise ValidationError("block matrix must be symmetric")
    return B


def cut_norm_step(D, mode: str = "exact", rng=None, starts: int = 20) -> float:
    """Cut norm ``sup_{S,T} |int_{S x T} D|`` of a (signed) step kernel on the regular partition.

    ``D`` is a :class:`Step` or a square matrix of block values (a difference
    of two step graphons may be negative).  For a step kernel the integral is
    bilinear in the fractions of each block covered by ``S`` and ``T``, so the
    supremum is attained at unions of blocks.  ``exact`` enumerates every
    row-block subset and picks the best column set in closed form; ``greedy``
    alternates best responses from ``starts`` random subsets and returns a lower
    bound.
    """
    B = _signed_matrix(D)
    n = B.shape[0]
    A = B / n**2  # integral of one block
    if mode == "exact":
        if n > 20:
            raise BudgetExceededError("exact cut norm is limited to 20 blocks")
        best = 0.0
        step = 1 << min(n, 16)
        bits = np.arange(n)
        for lo in range(0, 1 << n, step):
            masks = np.arange(lo, min(lo + step, 1 << n))
            rows = ((masks[:, None] >> bits) & 1).astype(float)
            col = rows @ A
            pos = np.where(col > 0, col, 0.0).sum(axis=1)
            neg = np.where(col < 0, col, 0.0).sum(axis=1)
            best = max(best, float(pos.max()), float(-neg.min()))
        return best
    if mode != "greedy":
        raise ValidationError(f"unknown mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    best = 0.0
    for sign in (1.0, -1.0):
        M = sign * A
        for _ in range(starts):
            s = rng.random(n) < 0.5
            val = -np.inf
            for _ in range(100):
                t = (s.astype(float) @ M) > 0
                s = (M @ t.astype(float)) > 0
                new = float(s.astype(float) @ M @ t.astype(float))
                if new <= val:
                    break
                val = new
            best = max(best, val)
    return best


def l2_operator_norm(basis) -> float:
    """Largest retained ``|lambda_j|`` (graph bases are normalized by ``n``)."""
    if isinstance(basis, SpectralBasis):
        lam = basis.eigvals / basis.n
    else:
        lam = basis.eigvals
    return float(np.max(np.abs(lam))) if len(lam) else 0.0


# --- motif files ----------------------------------------------------------------


def write_motif(F: Motif, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={F.n_vertices}\n")
        for i, j in _edge_list(F) if not isinstance(F, _DoubleEdge) else F.edges:
            fh.write(f"{i},{j}\n")


def read_motif(path) -> Motif:
    n = None
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    n = int(body[2:])
                continue
            a, b = (int(t) for t in line.replace(" ", ",").split(",") if t)
            edges.append((a, b))
    if n is None:
        n = 1 + max(max(e) for e in edges) if edges else 1
    return Motif(n, tuple(edges))
