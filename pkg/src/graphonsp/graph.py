"""Finite graphs, signed-index spectral bases and the graph Fourier transform.

Eigenvalues are indexed by sign: positive indices ``1, 2, ...`` hold the
nonnegative eigenvalues in decreasing order, negative indices ``-1, -2, ...``
hold the negative eigenvalues with ``lambda_{-1}`` the most negative one::

    lambda_1 >= lambda_2 >= ... >= 0 >= ... >= lambda_{-2} >= lambda_{-1}

Throughout the package a basis stores its eigenpairs as columns in that
order (positive indices first, then ``-1, -2, ...``) together with the
array of signed indices, and coefficient vectors are aligned with it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = [
    "Graph",
    "SpectralBasis",
    "eigendecompose",
    "signed_eigenvalues",
    "gft",
    "igft",
    "read_adjacency_csv",
    "write_adjacency_csv",
    "read_edge_list",
    "write_edge_list",
    "read_signal_csv",
    "write_signal_csv",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph given by a symmetric shift operator with entries in [0, 1]."""

    S: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValidationError(f"shift operator must be square, got shape {S.shape}")
        if S.shape[0] == 0:
            raise ValidationError("graph must have at least one node")
        if not np.all(np.isfinite(S)):
            raise ValidationError("shift operator has non-finite entries")
        if not np.array_equal(S, S.T):
            raise ValidationError("shift operator must be exactly symmetric")
        if S.min() < 0.0 or S.max() > 1.0:
            raise ValidationError("shift operator entries must lie in [0, 1]")
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def permute(self, order) -> "Graph":
        """Relabel nodes so that new node ``i`` is old node ``order[i]``."""
        order = np.asarray(order)
        return Graph(self.S[np.ix_(order, order)])

    def edge_density(self) -> float:
        return float(self.S.sum() / self.n**2)

    def __repr__(self):
        return f"Graph(n={self.n}, density={self.edge_density():.4g})"


def _as_signal(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValidationError(f"signal of shape {x.shape} does not match {n} nodes")
    if not np.all(np.isfinite(x)):
        raise ValidationError("signal has non-finite entries")
    return x


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Signed-index eigendecomposition of a symmetric matrix.

    ``eigvals[p]`` and ``eigvecs[:, p]`` form the eigenpair with signed index
    ``indices[p]``.
    """

    eigvals: np.ndarray
    eigvecs: np.ndarray
    indices: np.ndarray
    _pos: dict = field(init=False, repr=False)

    def __post_init__(self):
        for arr in (self.eigvals, self.eigvecs, self.indices):
            arr.setflags(write=False)
        object.__setattr__(self, "_pos", {int(j): p for p, j in enumerate(self.indices)})

    @property
    def n(self) -> int:
        return self.eigvecs.shape[0]

    def position(self, j: int) -> int:
        try:
            return self._pos[int(j)]
        except KeyError:
            raise KeyError(f"signed index {j} not present in basis") from None

    def eigval(self, j: int) -> float:
        return float(self.eigvals[self.position(j)])

    def eigvec(self, j: int) -> np.ndarray:
        return self.eigvecs[:, self.position(j)]

    def as_dict(self, coeffs) -> dict[int, float]:
        """Map a coefficient vector aligned with this basis to ``{index: value}``."""
        return {int(j): float(c) for j, c in zip(self.indices, coeffs)}


def _canonical_order(w: np.ndarray, V: np.ndarray, positions: np.ndarray, size: int):
    """Canonical signed ordering of eigenpairs returned by an ascending solver.

    ``positions`` are the ascending ranks of the given eigenvalues within the
    full spectrum of a ``size``-dimensional operator, which is what fixes their
    signed indices when only part of the spectrum was computed.
    """
    w = np.array(w, dtype=float)
    V = np.array(V, dtype=float)
    scale = np.max(np.abs(w)) if w.size else 0.0
    tol = 64 * np.finfo(float).eps * max(size, 1) * scale
    w[np.abs(w) <= tol] = 0.0

    # canonical sign: largest-magnitude component positive (first on ties)
    piv = np.argmax(np.abs(V), axis=0)
    flip = V[piv, np.arange(V.shape[1])] < 0
    V[:, flip] *= -1

    nonneg = w >= 0
    # negative eigenvalues keep ascending rank; nonnegative ones count from the top
    idx = np.where(nonneg, size - positions, -(positions + 1))

    # order: positive indices ascending, then negative indices -1, -2, ...
    key = np.where(idx > 0, idx, size + 1 - idx)
    order = np.argsort(key, kind="stable")
    w, V, idx = w[order], V[:, order], idx[order]

    # exact ties: canonical order by eigenvector lexicographic comparison
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] == w[start] and (idx[stop] > 0) == (idx[start] > 0):
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            sub = np.lexsort(block[::-1])[::-1]
            V[:, start:stop] = block[:, sub]
        start = stop

    return w, V, idx


def _signed_from_full(w_asc: np.ndarray, V_asc: np.ndarray) -> SpectralBasis:
    size = len(w_asc)
    w, V, idx = _canonical_order(w_asc, V_asc, np.arange(size), size)
    return SpectralBasis(eigvals=w, eigvecs=V, indices=idx.astype(int))


def eigendecompose(G: Graph | np.ndarray) -> SpectralBasis:
    """Full symmetric eigendecomposition with signed-index ordering.

    Eigenvalues within ``64 * eps * n * max|lambda|`` of zero are snapped to
    exactly zero and receive positive indices.  Each eigenvector is normalized
    in sign so that its largest-magnitude entry is positive.
    """
    S = G.S if isinstance(G, Graph) else np.asarray(G, dtype=float)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on {S.shape} matrix: {exc}") from exc
    return _signed_from_full(w, V)


def signed_eigenvalues(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues only, as ``(indices, values)`` in canonical signed order."""
    S = S.S if isinstance(S, Graph) else np.asarray(S, dtype=float)
    try:
        w = np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on {S.shape} matrix: {exc}") from exc
    size = len(w)
    scale = np.max(np.abs(w)) if size else 0.0
    w = np.where(np.abs(w) <= 64 * np.finfo(float).eps * max(size, 1) * scale, 0.0, w)
    neg = w[w < 0]
    pos = w[w >= 0][::-1]
    idx = np.concatenate([np.arange(1, len(pos) + 1), -np.arange(1, len(neg) + 1)])
    return idx, np.concatenate([pos, neg])


def gft(basis: SpectralBasis, x) -> np.ndarray:
    """Graph Fourier transform, ``x_hat[p] = <v_{indices[p]}, x>``."""
    x = _as_signal(x, basis.n)
    return basis.eigvecs.T @ x


def igft(basis: SpectralBasis, coeffs) -> np.ndarray:
    """Inverse graph Fourier transform, ``x = sum_j x_hat_j v_j``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.eigvecs.shape[1],):
        raise ValidationError(
            f"{coeffs.shape[0] if coeffs.ndim else 0} coefficients for a basis "
            f"with {basis.eigvecs.shape[1]} eigenpairs"
        )
    return basis.eigvecs @ coeffs


# --- file formats -----------------------------------------------------------


def write_adjacency_csv(G: Graph, path) -> None:
    np.savetxt(path, G.S, delimiter=",", fmt="%.17g")


def read_adjacency_csv(path) -> Graph:
    S = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    return Graph(S)


def write_edge_list(G: Graph, path) -> None:
    """One ``i,j,w`` line per edge with ``i <= j`` (0-based); first line holds ``n``."""
    iu, ju = np.nonzero(np.triu(G.S))
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={G.n}\n")
        for i, j in zip(iu, ju):
            fh.write(f"{i},{j},{G.S[i, j]:.17g}\n")


def read_edge_list(path, n: int | None = None) -> Graph:
    rows = []
    header_n = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().startswith("n="):
                header_n = int(line[1:].strip()[2:])
            continue
        parts = [p.strip() for p in line.replace("\t", ",").split(",") if p.strip()]
        if len(parts) not in (2, 3):
            raise ValidationError(f"bad edge line: {line!r}")
        w = float(parts[2]) if len(parts) == 3 else 1.0
        rows.append((int(parts[0]), int(parts[1]), w))
    if n is None:
        n = header_n if header_n is not None else 1 + max(max(i, j) for i, j, _ in rows)
    S = np.zeros((n, n))
    for i, j, w in rows:
        S[i, j] = S[j, i] = w
    return Graph(S)


def write_signal_csv(x, path, header: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        for v in np.asarray(x, dtype=float):
            w.writerow([repr(float(v))])


def read_signal_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=1, comments="#").astype(float)
