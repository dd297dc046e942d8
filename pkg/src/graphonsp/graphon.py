"""Graphon representations, W-random graph sampling and discretization.

All graphons evaluate vectorially: ``W(u, v)`` broadcasts its arguments like a
numpy ufunc, and ``W.kernel(u)`` returns the matrix ``[W(u_i, u_j)]``.

Step graphons use the regular partition ``I_j = [(j-1)/n, j/n)`` with the last
block closed, so evaluation is defined on all of [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ValidationError
from .graph import Graph

__all__ = [
    "Graphon",
    "Constant",
    "SBM",
    "ExpDistance",
    "Step",
    "GridSampled",
    "LatentLabels",
    "induced_graphon",
    "sample_latents",
    "sample_graph",
    "sample_graph_sequence",
    "discretize",
    "grid_midpoints",
    "block_index",
    "parse_graphon_spec",
    "save_step_csv",
    "load_step_csv",
]


def _unit(x, name="argument") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def grid_midpoints(N: int) -> np.ndarray:
    """Midpoints ``(i - 0.5) / N`` of the regular partition of [0, 1]."""
    return (np.arange(N) + 0.5) / N


def block_index(u, n_blocks: int) -> np.ndarray:
    """Index of the regular-partition block containing each ``u`` (last block closed)."""
    return np.minimum((np.asarray(u, dtype=float) * n_blocks).astype(np.intp), n_blocks - 1)


class Graphon:
    """Symmetric measurable kernel on the unit square with values in [0, 1]."""

    def _eval(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, u, v):
        u = _unit(u, "u")
        v = _unit(v, "v")
        out = self._eval(*np.broadcast_arrays(u, v))
        return float(out) if out.ndim == 0 else out

    def kernel(self, u, v=None) -> np.ndarray:
        """Matrix of values ``W(u_i, v_j)``; symmetric by construction when ``v`` is omitted."""
        u = _unit(u, "u")
        if v is not None:
            v = _unit(v, "v")
            return self._eval(u[:, None], v[None, :])
        M = self._eval(u[:, None], u[None, :])
        iu = np.triu_indices(len(u), 1)
        M[(iu[1], iu[0])] = M[iu]
        return M

    @property
    def spec(self) -> str:
        """One-line ``family:params`` description understood by :func:`parse_graphon_spec`."""
        raise NotImplementedError

    @property
    def is_step(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant(Graphon):
    """Erdos-Renyi graphon ``W = p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"probability {self.p} outside [0, 1]")

    def _eval(self, u, v):
        return np.full(np.broadcast(u, v).shape, float(self.p))

    @property
    def spec(self):
        return f"er:{self.p!r}"


@dataclass(frozen=True, eq=False)
class SBM(Graphon):
    """Stochastic block model graphon.

    ``boundaries`` are the right ends of the communities (last one is 1); a
    label ``u`` belongs to community ``k`` when ``b_{k-1} < u <= b_k``, with 0
    in the first community.
    """

    boundaries: tuple
    block_probs: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        P = np.array(self.block_probs, dtype=float)
        if b.ndim != 1 or len(b) == 0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0) or b[0] <= 0:
            raise ValidationError("SBM boundaries must be strictly increasing in (0, 1] ending at 1")
        if P.shape != (len(b), len(b)):
            raise ValidationError("block_probs must be square with one row per community")
        if not np.array_equal(P, P.T) or P.min() < 0 or P.max() > 1:
            raise ValidationError("block_probs must be symmetric with entries in [0, 1]")
        P.setflags(write=False)
        object.__setattr__(self, "boundaries", tuple(float(x) for x in b))
        object.__setattr__(self, "block_probs", P)

    @classmethod
    def balanced(cls, p_in: float, p_out: float, k: int = 2) -> "SBM":
        P = np.full((k, k), float(p_out))
        np.fill_diagonal(P, p_in)
        return cls(tuple((np.arange(1, k + 1) / k).tolist()), P)

    def community(self, u) -> np.ndarray:
        b = np.asarray(self.boundaries)
        return np.minimum(np.searchsorted(b, u, side="right"), len(b) - 1)

    def _eval(self, u, v):
        return self.block_probs[self.community(u), self.community(v)]

    @property
    def spec(self):
        b = ",".join(repr(x) for x in self.boundaries)
        p = ",".join(repr(float(x)) for x in self.block_probs.ravel())
        return f"sbm:{b};{p}"


@dataclass(frozen=True)
class ExpDistance(Graphon):
    """Geometric graphon ``exp(-beta * |u - v|**power)``.

    ``power=2`` is the Gaussian-distance graphon used for the GMRF models;
    ``power=1`` is the soft random geometric form used for the sensor networks.
    """

    beta: float
    power: int = 2

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError("beta must be nonnegative")
        if self.power not in (1, 2):
            raise ValidationError("power must be 1 or 2")

    def _eval(self, u, v):
        d = np.abs(u - v)
        return np.exp(-self.beta * (d * d if self.power == 2 else d))

    @property
    def spec(self):
        return f"{'exp' if self.power == 2 else 'srgg'}:{self.beta!r}"


@dataclass(frozen=True, eq=False)
class Step(Graphon):
    """Step graphon with value ``B[j, k]`` on ``I_j x I_k`` of the regular partition."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float, ndmin=2)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] == 0:
            raise ValidationError(f"step matrix must be square and nonempty, got {B.shape}")
        if not np.array_equal(B, B.T):
            raise ValidationError("step matrix must be symmetric")
        if not np.all(np.isfinite(B)) or B.min() < 0 or B.max() > 1:
            raise ValidationError("step matrix entries must lie in [0, 1]")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @property
    def n_blocks(self) -> int:
        return self.B.shape[0]

    @property
    def is_step(self) -> bool:
        return True

    def _eval(self, u, v):
        k = self.n_blocks
        return self.B[block_index(u, k), block_index(v, k)]

    @property
    def spec(self):
        return f"step:<{self.n_blocks}x{self.n_blocks} matrix>"


class GridSampled(Step):
    """Closed-form graphon sampled at the midpoints of an ``N x N`` grid.

    Evaluation is nearest-cell, so this is a step graphon with ``N`` blocks.
    """

    @property
    def values(self) -> np.ndarray:
        return self.B

    @property
    def N(self) -> int:
        return self.n_blocks


@dataclass(frozen=True)
class LatentLabels:
    """Latent positions ``u_i`` of sampled nodes."""

    u: np.ndarray
    mode: str = "uniform_iid"

    def __post_init__(self):
        u = _unit(np.array(self.u, dtype=float, ndmin=1), "labels")
        if self.mode not in ("uniform_iid", "regular_grid"):
            raise ValidationError(f"unknown label mode {self.mode!r}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def __len__(self):
        return len(self.u)


def induced_graphon(G: Graph) -> Step:
    """Step graphon whose value on ``I_j x I_k`` is ``S[j, k]``."""
    if not isinstance(G, Graph):
        G = Graph(G)
    return Step(G.S)


def sample_latents(n: int, mode: str = "uniform_iid", rng=None) -> LatentLabels:
    if n < 1:
        raise DomainError("need at least one node")
    if mode == "regular_grid":
        return LatentLabels(grid_midpoints(n), mode)
    if mode != "uniform_iid":
        raise ValidationError(f"unknown label mode {mode!r}")
    if rng is None:
        raise ValidationError("uniform_iid sampling needs an explicit generator")
    return LatentLabels(rng.random(n), mode)


def sample_graph(W: Graphon, labels, mode: str = "bernoulli", rng=None) -> Graph:
    """Sample a graph on the given latent labels.

    ``weighted`` sets ``S_ij = W(u_i, u_j)``; ``bernoulli`` draws each unordered
    pair once as an independent Bernoulli edge.  The diagonal is always zero.
    """
    u = labels.u if isinstance(labels, LatentLabels) else _unit(np.atleast_1d(labels), "labels")
    n = len(u)
    if n == 0:
        raise DomainError("labels must be nonempty")
    iu = np.triu_indices(n, 1)
    P = W(u[iu[0]], u[iu[1]]) if n > 1 else np.empty(0)
    if mode == "bernoulli":
        if rng is None:
            raise ValidationError("bernoulli sampling needs an explicit generator")
        vals = (rng.random(len(P)) < P).astype(float)
    elif mode == "weighted":
        vals = np.asarray(P, dtype=float)
    else:
        raise ValidationError(f"unknown sampling mode {mode!r}")
    S = np.zeros((n, n))
    S[iu] = vals
    S[(iu[1], iu[0])] = vals
    return Graph(S)


def sample_graph_sequence(W: Graphon, n_list, rng, mode: str = "bernoulli"):
    """Nested W-random graphs: each ``G_n`` is an induced subgraph of the next.

    One label vector and one matrix of uniforms are drawn for the largest
    ``n``; each ``G_n`` is the subgraph induced by the first ``n`` nodes, so
    the list is a single growing sequence.  Returns ``[(labels, graph), ...]``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or min(n_list) < 1:
        raise DomainError("node counts must be positive")
    if mode not in ("bernoulli", "weighted"):
        raise ValidationError(f"unknown sampling mode {mode!r}")
    m = max(n_list)
    u = rng.random(m)
    P = W.kernel(u)
    if mode == "bernoulli":
        R = rng.random((m, m))
        A = np.triu((R < P).astype(float), 1)
    else:
        A = np.triu(P, 1)
    A = A + A.T
    return [(LatentLabels(u[:n]), Graph(A[:n, :n])) for n in n_list]


def discretize(W: Graphon, N: int) -> GridSampled:
    """Evaluate ``W`` at the regular-grid midpoints, giving an ``N x N`` step graphon."""
    if N < 2:
        raise DomainError("resolution must be at least 2")
    return GridSampled(W.kernel(grid_midpoints(N)))


# --- serialization ------------------------------------------------------------


def save_step_csv(W: Step, path) -> None:
    np.savetxt(path, W.B, delimiter=",", fmt="%.17g")


def load_step_csv(path) -> Step:
    return Step(np.loadtxt(path, delimiter=",", ndmin=2, comments="#"))


def parse_graphon_spec(text: str, base_dir=None) -> Graphon:
    """Parse ``family:params``.

    Families: ``er:p``, ``sbm:b1,..,bk;p11,p12,..,pkk``, ``sbm2:p_in,p_out``
    (balanced two-block), ``exp:beta`` (squared distance), ``srgg:beta``
    (absolute distance), ``step:file.csv``.
    """
    if ":" not in text:
        raise ValidationError(f"graphon spec {text!r} is not of the form family:params")
    family, _, params = text.strip().partition(":")
    family = family.strip().lower()
    try:
        if family in ("er", "constant"):
            return Constant(float(params))
        if family == "exp":
            return ExpDistance(float(params), power=2)
        if family == "srgg":
            return ExpDistance(float(params), power=1)
        if family == "sbm2":
            p_in, p_out = (float(x) for x in params.split(","))
            return SBM.balanced(p_in, p_out)
        if family == "sbm":
            b_txt, _, p_txt = params.partition(";")
            b = [float(x) for x in b_txt.split(",")]
            p = np.array([float(x) for x in p_txt.split(",")]).reshape(len(b), len(b))
            return SBM(tuple(b), p)
        if family == "step":
            path = Path(params)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return load_step_csv(path)
    except (ValueError, OSError) as exc:
        raise ValidationError(f"bad graphon spec {text!r}: {exc}") from exc
    raise ValidationError(f"unknown graphon family {family!r}")
