"""Graphon operator spectra, graphon Fourier transform and eigenspace projections.

A graphon operator ``T_W`` is approximated by the step graphon obtained from
``discretize(W, N)``.  For a step graphon with ``N`` blocks and matrix ``M`` the
eigenpairs are exact::

    lambda_j(T) = lambda_j(M) / N,     phi_j(u) = sqrt(N) * [v_j]_k  for u in I_k

so eigenfunctions are stored as their values on the ``N`` grid cells and inner
products are the quadrature ``<f, g> = (1/N) sum_i f_i g_i``.

Signals on different regular grids are compared exactly with
:func:`step_inner`, which integrates the product of two step functions over the
common refinement of their partitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import DomainError, NumericalError, ValidationError
from .graph import Graph, _canonical_order, eigendecompose, gft
from .graphon import Graphon, discretize, grid_midpoints, induced_graphon

__all__ = [
    "GraphonBasis",
    "GraphonSignal",
    "graphon_eigs",
    "wft",
    "iwft",
    "wft_residual",
    "induced_signal",
    "lemma1_bridge_check",
    "subspace_project",
    "projection_distance",
    "eigengap_set",
    "step_inner",
    "step_norm",
    "step_distance",
]


@dataclass(frozen=True, eq=False)
class GraphonBasis:
    """Signed-index eigenpairs of a (discretized) graphon operator."""

    N: int
    eigvals: np.ndarray
    eigfuncs: np.ndarray
    indices: np.ndarray
    k_kept: int | None
    _pos: dict = field(init=False, repr=False)

    def __post_init__(self):
        for arr in (self.eigvals, self.eigfuncs, self.indices):
            arr.setflags(write=False)
        object.__setattr__(self, "_pos", {int(j): p for p, j in enumerate(self.indices)})

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def is_complete(self) -> bool:
        return self.size == self.N

    def position(self, j: int) -> int:
        try:
            return self._pos[int(j)]
        except KeyError:
            raise KeyError(f"signed index {j} not retained in basis") from None

    def eigval(self, j: int) -> float:
        return float(self.eigvals[self.position(j)])

    def eigfunc(self, j: int) -> np.ndarray:
        return self.eigfuncs[:, self.position(j)]

    def as_dict(self, coeffs) -> dict[int, float]:
        return {int(j): float(c) for j, c in zip(self.indices, coeffs)}


class GraphonSignal:
    """Square-integrable function on [0, 1].

    Either a closed-form evaluator (sampled at grid midpoints on demand) or a
    step function given by its values on a regular grid.
    """

    def __init__(self, values=None, func: Callable | None = None, description: str = ""):
        if (values is None) == (func is None):
            raise ValidationError("give exactly one of values or func")
        self.func = func
        self.description = description
        self._norm = None
        if values is not None:
            values = np.array(values, dtype=float, ndmin=1)
            if values.ndim != 1 or len(values) == 0 or not np.all(np.isfinite(values)):
                raise ValidationError("grid signal must be a finite nonempty vector")
            values.setflags(write=False)
        self.values = values

    @classmethod
    def from_function(cls, func: Callable, description: str = "") -> "GraphonSignal":
        return cls(func=func, description=description)

    @property
    def is_grid(self) -> bool:
        return self.values is not None

    @property
    def resolution(self) -> int | None:
        return None if self.values is None else len(self.values)

    def on_grid(self, N: int) -> np.ndarray:
        """Values on the ``N``-cell grid; grid signals must already have resolution ``N``."""
        if self.values is not None:
            if len(self.values) != N:
                raise ValidationError(f"grid signal has resolution {len(self.values)}, expected {N}")
            return self.values
        return np.asarray(self.func(grid_midpoints(N)), dtype=float)

    def refine(self, N: int) -> "GraphonSignal":
        """The same step function on a finer grid whose size is a multiple of the current one."""
        if self.values is None:
            return GraphonSignal(self.on_grid(N), description=self.description)
        m, r = divmod(N, len(self.values))
        if r or m < 1:
            raise ValidationError(f"cannot refine resolution {len(self.values)} to {N}")
        return GraphonSignal(np.repeat(self.values, m), description=self.description)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.values is not None:
            n = len(self.values)
            return self.values[np.minimum((u * n).astype(np.intp), n - 1)]
        return np.asarray(self.func(u), dtype=float)

    @property
    def norm(self) -> float:
        if self._norm is None:
            if self.values is not None:
                self._norm = float(np.sqrt(np.mean(self.values**2)))
            else:
                val, _ = scipy.integrate.quad(lambda t: float(self.func(np.array(t))) ** 2, 0, 1, limit=200)
                self._norm = float(np.sqrt(val))
        return self._norm

    def __repr__(self):
        kind = f"grid N={len(self.values)}" if self.values is not None else "closed form"
        return f"GraphonSignal({kind}{', ' + self.description if self.description else ''})"


def graphon_eigs(W: Graphon, N: int = 2000, k: int | None = 20) -> GraphonBasis:
    """Eigenpairs of ``discretize(W, N)`` viewed as a step-graphon operator.

    ``k`` is the number of eigenpairs retained per sign; ``None`` keeps all ``N``.
    """
    if N < 2:
        raise DomainError("resolution must be at least 2")
    if k is not None and (k < 1 or k > N):
        raise DomainError(f"cannot retain {k} eigenpairs per sign at resolution {N}")
    M = np.asarray(W.B if (W.is_step and W.n_blocks == N) else discretize(W, N).B)
    try:
        if k is None or 2 * k >= N:
            w, V = np.linalg.eigh(M)
            pos = np.arange(N)
        else:
            w_lo, V_lo = scipy.linalg.eigh(M, subset_by_index=[0, k - 1])
            w_hi, V_hi = scipy.linalg.eigh(M, subset_by_index=[N - k, N - 1])
            w = np.concatenate([w_lo, w_hi])
            V = np.concatenate([V_lo, V_hi], axis=1)
            pos = np.concatenate([np.arange(k), np.arange(N - k, N)])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"eigensolver failed at resolution {N}: {exc}") from exc
    w, V, idx = _canonical_order(w, V, pos, N)
    if k is not None and 2 * k < N:
        # keep k per sign among what was computed
        keep = np.concatenate([np.flatnonzero(idx > 0)[:k], np.flatnonzero(idx < 0)[:k]])
        w, V, idx = w[keep], V[:, keep], idx[keep]
    return GraphonBasis(N=N, eigvals=w / N, eigfuncs=V * np.sqrt(N), indices=idx.astype(int), k_kept=k)


def wft(basis: GraphonBasis, phi: GraphonSignal) -> np.ndarray:
    """Graphon Fourier coefficients ``<phi, phi_j>`` for every retained index."""
    vals = phi.on_grid(basis.N)
    return basis.eigfuncs.T @ vals / basis.N


def wft_residual(basis: GraphonBasis, phi: GraphonSignal) -> float:
    """Energy of ``phi`` outside the retained eigenfunctions, ``||phi||^2 - sum phi_hat^2``."""
    vals = phi.on_grid(basis.N)
    c = wft(basis, phi)
    return float(max(np.mean(vals**2) - np.sum(c**2), 0.0))


def iwft(basis: GraphonBasis, coeffs) -> GraphonSignal:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.size,):
        raise ValidationError(f"expected {basis.size} coefficients, got shape {coeffs.shape}")
    return GraphonSignal(basis.eigfuncs @ coeffs)


def induced_signal(G: Graph | int, x) -> GraphonSignal:
    """Step signal equal to ``x_l`` on block ``I_l``."""
    n = G.n if isinstance(G, Graph) else int(G)
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValidationError(f"signal of shape {x.shape} does not match {n} nodes")
    return GraphonSignal(x, description="induced")


def _clusters(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(vals, kind="stable")
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if vals[b] - vals[a] <= tol:
            cur.append(b)
        else:
            groups.append(np.array(cur))
            cur = [b]
    groups.append(np.array(cur))
    return groups


def lemma1_bridge_check(G: Graph, x, refine: int = 1) -> dict:
    """Compare graph spectra with the spectra of the induced step graphon.

    The induced graphon is discretized on ``refine * n`` cells.  Eigenvalues
    must satisfy ``lambda_j(T_{W_G}) = lambda_j(S) / n`` and the transforms
    ``wft(phi_G)_j = gft(x)_j / sqrt(n)``.  With ``refine > 1`` the operator
    has an extra null space, so only indices with nonzero eigenvalues are
    compared, and coefficients are compared through the norm of each cluster of
    equal eigenvalues (invariant to the choice of basis inside it).
    """
    if refine < 1:
        raise DomainError("refine must be a positive integer")
    n = G.n
    sb = eigendecompose(G)
    N = refine * n
    gb = graphon_eigs(induced_graphon(G), N=N, k=None)
    xhat = gft(sb, x)
    phi = induced_signal(G, x).refine(N)
    phat = wft(gb, phi)

    if refine == 1:
        idx = sb.indices
    else:
        idx = sb.indices[sb.eigvals != 0]
    if len(idx) == 0:
        return {"n": n, "refine": refine, "compared": 0, "max_eigval_gap": 0.0, "max_wft_gap": 0.0}

    lam_g = np.array([gb.eigval(j) for j in idx]) if refine > 1 else gb.eigvals
    lam_s = np.array([sb.eigval(j) for j in idx]) / n
    eig_gap = float(np.max(np.abs(lam_g - lam_s)))

    pg = np.array([phat[gb.position(j)] for j in idx])
    ps = np.array([xhat[sb.position(j)] for j in idx]) / np.sqrt(n)
    if refine == 1:
        wft_gap = float(np.max(np.abs(pg - ps)))
    else:
        scale = max(np.max(np.abs(lam_s)), 1.0 / n)
        wft_gap = 0.0
        for grp in _clusters(lam_s, 1e-9 * scale):
            wft_gap = max(wft_gap, abs(np.linalg.norm(pg[grp]) - np.linalg.norm(ps[grp])))
    return {
        "n": n,
        "refine": refine,
        "compared": int(len(idx)),
        "max_eigval_gap": eig_gap,
        "max_wft_gap": float(wft_gap),
    }


def subspace_project(basis: GraphonBasis, cluster, phi: GraphonSignal) -> GraphonSignal:
    """Orthogonal projection of ``phi`` onto the span of the listed eigenfunctions."""
    cluster = [int(j) for j in cluster]
    if not cluster:
        return GraphonSignal(np.zeros(basis.N))
    pos = [basis.position(j) for j in cluster]
    F = basis.eigfuncs[:, pos]
    c = F.T @ phi.on_grid(basis.N) / basis.N
    return GraphonSignal(F @ c)


def eigengap_set(basis: GraphonBasis, c: float) -> tuple[list[int], float]:
    """Indices with ``|lambda_j| >= c`` and the smallest distance from one of them to another eigenvalue.

    The distance is ``inf`` when the set is empty or the basis holds one eigenpair.
    """
    lam = basis.eigvals
    sel = [int(j) for j, v in zip(basis.indices, lam) if abs(v) >= c]
    gap = np.inf
    for j in sel:
        p = basis.position(j)
        others = np.delete(lam, p)
        if others.size:
            gap = min(gap, float(np.min(np.abs(others - lam[p]))))
    return sel, gap


# --- exact L2 geometry of step functions on different regular grids -------------


def _overlap(n: int, m: int):
    """Common refinement of the n- and m-cell regular partitions.

    Returns the block index in each partition and the length of every piece.
    """
    cuts = np.union1d(np.arange(n + 1) * m, np.arange(m + 1) * n)  # in units of 1/(n*m)
    starts = cuts[:-1]
    lengths = np.diff(cuts) / (n * m)
    return starts // m, starts // n, lengths


def step_inner(a, b) -> np.ndarray | float:
    """Exact ``L^2[0,1]`` inner products of step functions on regular grids.

    ``a`` is ``(n,)`` or ``(n, p)`` and ``b`` is ``(m,)`` or ``(m, q)``;
    columns are step functions.  Returns a scalar, vector or ``(p, q)`` matrix.
    """
    a = np.asarray(a.values if isinstance(a, GraphonSignal) else a, dtype=float)
    b = np.asarray(b.values if isinstance(b, GraphonSignal) else b, dtype=float)
    ia, ib, length = _overlap(a.shape[0], b.shape[0])
    A = a[ia] * (length if a.ndim == 1 else length[:, None])
    return A.T @ b[ib]


def step_norm(a) -> float:
    a = np.asarray(a.values if isinstance(a, GraphonSignal) else a, dtype=float)
    return float(np.sqrt(np.mean(a**2)))


def step_distance(a, b) -> float:
    """Exact L2 distance between two step functions on (possibly different) regular grids."""
    a = np.asarray(a.values if isinstance(a, GraphonSignal) else a, dtype=float)
    b = np.asarray(b.values if isinstance(b, GraphonSignal) else b, dtype=float)
    ia, ib, length = _overlap(len(a), len(b))
    return float(np.sqrt(np.sum(length * (a[ia] - b[ib]) ** 2)))


def projection_distance(F, H) -> float:
    """Operator norm ``||P_F - P_H||`` of orthogonal projections onto two spans.

    ``F`` and ``H`` hold L2-orthonormal step functions as columns, on grids of
    any sizes.  Equal dimensions give the sine of the largest principal angle;
    unequal dimensions give 1.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float).T).T
    H = np.atleast_2d(np.asarray(H, dtype=float).T).T
    if F.shape[1] != H.shape[1]:
        return 1.0
    s = np.linalg.svd(step_inner(F, H), compute_uv=False)
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, s.min()) ** 2)))
