"""Rating prediction with graph filters on user-similarity networks.

Ratings are read from the MovieLens 100k ``u.data`` format.  A user network
links each user to its most correlated peers, a polynomial filter on that
network is fit by ridge regression, and filters fit on small random cohorts
are transferred to the network of all users.

Movie rating vectors are centered by each user's mean training rating before
filtering; predictions add the mean back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MissingDataError, NumericalError, ValidationError
from .experiments import ConvergenceReport, ExperimentConfig, derive_rng
from .filters import PolyFilter
from .graph import Graph

__all__ = [
    "RatingMatrix",
    "UserNetwork",
    "parse_ratings",
    "write_ratings",
    "pearson_similarity",
    "build_user_network",
    "split_entries",
    "fit_filter_taps",
    "predict",
    "predict_and_rmse",
    "exp_movie",
    "exp_movie_from_config",
    "synthetic_ratings",
    "write_movie_table",
    "FETCH_INSTRUCTIONS",
]

FETCH_INSTRUCTIONS = """\
The MovieLens 100k dataset is not shipped with this package.
Download it from https://grouplens.org/datasets/movielens/100k/ , unzip it and
pass the path of ml-100k/u.data with --data, or run demos/fetch_movielens.py.
Use --data synthetic to run the same pipeline on generated ratings."""


@dataclass(frozen=True, eq=False)
class RatingMatrix:
    """Sparse ratings as parallel arrays of 0-based user and movie indices.

    Entries are sorted by ``(user, movie)`` and unique.
    """

    users: np.ndarray
    movies: np.ndarray
    ratings: np.ndarray
    n_users: int
    n_movies: int
    timestamps: np.ndarray | None = None
    duplicates: int = 0

    def __post_init__(self):
        u = np.asarray(self.users, dtype=np.intp)
        m = np.asarray(self.movies, dtype=np.intp)
        r = np.asarray(self.ratings, dtype=float)
        if not (u.shape == m.shape == r.shape) or u.ndim != 1:
            raise ValidationError("users, movies and ratings must be equal-length vectors")
        if u.size and (u.min() < 0 or u.max() >= self.n_users or m.min() < 0 or m.max() >= self.n_movies):
            raise ValidationError("entry index out of range")
        if r.size and (r.min() < 1 or r.max() > 5):
            raise ValidationError("ratings must lie in [1, 5]")
        order = np.lexsort((m, u))
        u, m, r = u[order], m[order], r[order]
        if u.size > 1 and np.any((np.diff(u) == 0) & (np.diff(m) == 0)):
            raise ValidationError("duplicate (user, movie) pairs")
        ts = None if self.timestamps is None else np.asarray(self.timestamps, dtype=np.int64)[order]
        for a in (u, m, r) + ((ts,) if ts is not None else ()):
            a.setflags(write=False)
        object.__setattr__(self, "users", u)
        object.__setattr__(self, "movies", m)
        object.__setattr__(self, "ratings", r)
        object.__setattr__(self, "timestamps", ts)

    def __len__(self):
        return len(self.ratings)

    def dense(self, users=None) -> tuple[np.ndarray, np.ndarray]:
        """``(X, mask)`` over the listed users (all by default); missing ratings are 0."""
        users = np.arange(self.n_users) if users is None else np.asarray(users, dtype=np.intp)
        row = np.full(self.n_users, -1, dtype=np.intp)
        row[users] = np.arange(len(users))
        keep = row[self.users] >= 0
        X = np.zeros((len(users), self.n_movies))
        X[row[self.users[keep]], self.movies[keep]] = self.ratings[keep]
        return X, X > 0

    def subset(self, entries) -> "RatingMatrix":
        """Ratings at the given entry positions (boolean mask or integer positions)."""
        entries = np.asarray(entries)
        ts = None if self.timestamps is None else self.timestamps[entries]
        return RatingMatrix(
            self.users[entries], self.movies[entries], self.ratings[entries], self.n_users, self.n_movies, ts
        )

    def entry_set(self) -> set:
        return set(zip(self.users.tolist(), self.movies.tolist(), self.ratings.tolist()))


@dataclass(frozen=True, eq=False)
class UserNetwork:
    """Similarity graph over ``users`` (row ``i`` of the graph is user ``users[i]``)."""

    graph: Graph
    users: np.ndarray
    k_nn: int
    symmetrize: str = "max"
    floor: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.graph.n


# --- ingestion -------------------------------------------------------------------


def parse_ratings(path) -> RatingMatrix:
    """Read ``user<TAB>item<TAB>rating[<TAB>timestamp]`` lines with 1-based ids.

    A repeated ``(user, item)`` pair keeps the last rating; the number of
    overwritten entries is stored in ``duplicates``.
    """
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"{path} not found.\n{FETCH_INSTRUCTIONS}")
    table: dict = {}
    dup = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split("\t") if "\t" in text else text.split()
            if len(parts) not in (3, 4):
                raise ValidationError(f"{path}:{lineno}: expected 3 or 4 fields, got {len(parts)}")
            try:
                user, item = int(parts[0]), int(parts[1])
                rating = float(parts[2])
                ts = int(parts[3]) if len(parts) == 4 else 0
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
            if user < 1 or item < 1:
                raise ValidationError(f"{path}:{lineno}: ids are 1-based")
            if not (1 <= rating <= 5) or rating != int(rating):
                raise ValidationError(f"{path}:{lineno}: rating {parts[2]} not in 1..5")
            if (user, item) in table:
                dup += 1
            table[(user, item)] = (rating, ts)
    if not table:
        raise ValidationError(f"{path}: no ratings")
    keys = np.array(list(table.keys()), dtype=np.intp)
    vals = list(table.values())
    return RatingMatrix(
        users=keys[:, 0] - 1,
        movies=keys[:, 1] - 1,
        ratings=np.array([v[0] for v in vals]),
        n_users=int(keys[:, 0].max()),
        n_movies=int(keys[:, 1].max()),
        timestamps=np.array([v[1] for v in vals], dtype=np.int64),
        duplicates=dup,
    )


def write_ratings(R: RatingMatrix, path) -> None:
    ts = R.timestamps if R.timestamps is not None else np.zeros(len(R), dtype=np.int64)
    with open(path, "w") as fh:
        for u, m, r, t in zip(R.users, R.movies, R.ratings, ts):
            fh.write(f"{u + 1}\t{m + 1}\t{int(r)}\t{t}\n")


# --- similarity network ----------------------------------------------------------


def pearson_similarity(X: np.ndarray, mask: np.ndarray, min_common: int = 2) -> np.ndarray:
    """Pearson correlation of every user pair over the movies both rated.

    Means and deviations are taken over the co-rated set of each pair.  Pairs
    with fewer than ``min_common`` co-rated movies or zero variance get 0.
    """
    Mf = mask.astype(float)
    Xm = X * Mf
    n_ab = Mf @ Mf.T
    Sa = Xm @ Mf.T  # sum of a's ratings over movies also rated by b
    Saa = (Xm * Xm) @ Mf.T
    Sab = Xm @ Xm.T
    with np.errstate(divide="ignore", invalid="ignore"):
        cov = Sab - Sa * Sa.T / n_ab
        va = Saa - Sa**2 / n_ab
        vb = Saa.T - Sa.T**2 / n_ab
        corr = cov / np.sqrt(va * vb)
    tiny = 1e-12 * np.maximum(1.0, n_ab)
    bad = (n_ab < min_common) | (va <= tiny) | (vb <= tiny) | ~np.isfinite(corr)
    corr = np.where(bad, 0.0, np.clip(corr, -1.0, 1.0))
    corr = (corr + corr.T) / 2
    np.fill_diagonal(corr, 0.0)
    return corr


def build_user_network(
    R: RatingMatrix,
    users=None,
    k_nn: int = 40,
    symmetrize: str = "max",
) -> UserNetwork:
    """Top-``k_nn`` correlation network over ``users`` (all users by default).

    Negative correlations are clamped to 0, each user keeps its ``k_nn`` most
    similar peers, the result is symmetrized (``max`` or ``mean``) and divided
    by its largest weight.
    """
    users = np.arange(R.n_users) if users is None else np.asarray(users, dtype=np.intp)
    n = len(users)
    if n < 2:
        raise ValidationError("a user network needs at least two users")
    if k_nn < 1:
        raise ValidationError("k_nn must be positive")
    X, mask = R.dense(users)
    sim = np.maximum(pearson_similarity(X, mask), 0.0)
    keep = min(k_nn, n - 1)
    # stable ordering: larger similarity first, lower row position on ties
    order = np.argsort(-sim, axis=1, kind="stable")[:, :keep]
    A = np.zeros_like(sim)
    rows = np.repeat(np.arange(n), keep)
    A[rows, order.ravel()] = sim[rows, order.ravel()]
    if symmetrize == "max":
        A = np.maximum(A, A.T)
    elif symmetrize == "mean":
        A = (A + A.T) / 2
    else:
        raise ValidationError(f"unknown symmetrization {symmetrize!r}")
    top = A.max()
    if top > 0:
        A = A / top
    np.fill_diagonal(A, 0.0)
    return UserNetwork(Graph(A), users, k_nn, symmetrize, meta={"scale": float(top)})


# --- filter fitting --------------------------------------------------------------


def split_entries(R: RatingMatrix, train_fraction: float = 0.9, rng=None) -> np.ndarray:
    """Boolean training mask selecting ``round(train_fraction * len(R))`` random entries."""
    if rng is None:
        raise ValidationError("splitting needs an explicit generator")
    n_train = int(round(train_fraction * len(R)))
    mask = np.zeros(len(R), dtype=bool)
    mask[rng.permutation(len(R))[:n_train]] = True
    return mask


def _centered(R: RatingMatrix, users):
    X, mask = R.dense(users)
    counts = mask.sum(axis=1)
    glob = float(R.ratings.mean()) if len(R) else 3.0
    mu = np.where(counts > 0, X.sum(axis=1) / np.maximum(counts, 1), glob)
    Xc = np.where(mask, X - mu[:, None], 0.0)
    return Xc, mask, mu


def _shifts(S: np.ndarray, Xc: np.ndarray, K: int):
    """``[S^k Xc]`` and ``diag(S^k)`` for ``k = 0..K``."""
    P = [Xc]
    D = [np.ones(S.shape[0])]
    Sk = np.eye(S.shape[0])
    for _ in range(K):
        P.append(S @ P[-1])
        Sk = Sk @ S
        D.append(np.diag(Sk).copy())
    return P, D


def fit_filter_taps(net: UserNetwork, R_train: RatingMatrix, K: int, ridge: float = 1e-3) -> PolyFilter:
    """Ridge least squares for taps ``h_0..h_K``.

    Each observed rating is predicted from ``sum_k h_k [S^k x]_u`` where ``x``
    is the movie's centered rating vector with the target entry zeroed.
    Zeroing leaves nothing for ``h_0`` to act on, so ``h_0`` is always 0.
    """
    if K < 0:
        raise ValidationError("K must be >= 0")
    if ridge < 0:
        raise ValidationError("ridge must be nonnegative")
    Xc, mask, _ = _centered(R_train, net.users)
    P, D = _shifts(net.graph.S, Xc, K)
    r, c = np.nonzero(mask)
    A = np.column_stack([P[k][r, c] - D[k][r] * Xc[r, c] for k in range(K + 1)])
    y = Xc[r, c]
    G = A.T @ A + ridge * np.eye(K + 1)
    # columns of S^k x grow like degree^k; equilibrate so the condition number is meaningful
    d = np.sqrt(np.diag(G))
    d[d == 0] = 1.0
    Gs = G / np.outer(d, d)
    try:
        if not np.all(np.isfinite(Gs)) or np.linalg.cond(Gs) > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        h = np.linalg.solve(Gs, (A.T @ y) / d) / d
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"normal equations are singular ({exc}); increase the ridge parameter") from exc
    return PolyFilter(h)


def predict(net: UserNetwork, f: PolyFilter, R_train: RatingMatrix, users, movies) -> np.ndarray:
    """Clamped predictions at ``(users, movies)`` (global user ids, all in ``net``)."""
    Xc, _, mu = _centered(R_train, net.users)
    P, _ = _shifts(net.graph.S, Xc, f.K)
    row = np.full(R_train.n_users, -1, dtype=np.intp)
    row[net.users] = np.arange(net.n)
    rr = row[np.asarray(users)]
    if np.any(rr < 0):
        raise ValidationError("prediction requested for a user outside the network")
    cc = np.asarray(movies)
    # evaluation entries are not in the training signal, so no zeroing is needed
    out = mu[rr] + sum(f.taps[k] * P[k][rr, cc] for k in range(1, f.K + 1))
    return np.clip(out, 1.0, 5.0)


def predict_and_rmse(net: UserNetwork, f: PolyFilter, R_train: RatingMatrix, R_eval: RatingMatrix) -> float:
    pred = predict(net, f, R_train, R_eval.users, R_eval.movies)
    return float(np.sqrt(np.mean((pred - R_eval.ratings) ** 2)))


# --- transfer experiment -----------------------------------------------------------


def exp_movie(
    R: RatingMatrix,
    n_list=(50, 100, 200, 400, 600, 800),
    K_list=(1, 2, 3),
    master_seed: int = 0,
    k_nn: int = 40,
    symmetrize: str = "max",
    ridge: float = 1e-3,
    train_fraction: float = 0.9,
) -> tuple[ConvergenceReport, dict]:
    """Relative RMSE gap of cohort-trained filters applied to the full network.

    For each ``n`` the users are shuffled and cut into ``floor(U / n)``
    disjoint cohorts of ``n`` users; each cohort's filter is evaluated on the
    network of all users against the filter trained there.  Returns the report
    (rows ``K, n, cohort``) and ``{K: base RMSE}``.
    """
    active = np.unique(R.users)
    U = len(active)
    split_rng = derive_rng(master_seed, 1000, 0, 0)
    train_mask = split_entries(R, train_fraction, split_rng)
    R_train, R_eval = R.subset(train_mask), R.subset(~train_mask)

    full = build_user_network(R_train, active, k_nn, symmetrize)
    full_taps = {K: fit_filter_taps(full, R_train, K, ridge) for K in K_list}
    base = {K: predict_and_rmse(full, full_taps[K], R_train, R_eval) for K in K_list}

    rows = []
    for n in n_list:
        if n >= U:
            cohorts = [active]
        else:
            perm = derive_rng(master_seed, 1001, n, 0).permutation(active)
            cohorts = [np.sort(perm[g * n : (g + 1) * n]) for g in range(U // n)]
        for g, users in enumerate(cohorts):
            net = full if len(users) == U else build_user_network(R_train, users, k_nn, symmetrize)
            for K in K_list:
                taps = full_taps[K] if net is full else fit_filter_taps(net, R_train, K, ridge)
                rmse = predict_and_rmse(full, taps, R_train, R_eval)
                rows.append((K, n, g, abs(rmse - base[K]) / base[K], rmse))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return ConvergenceReport("movie", ("K", "n", "seed"), ("rel_rmse_diff", "rmse"), rows), base


def synthetic_ratings(
    n_users: int = 943,
    n_movies: int = 1682,
    mean_count: int = 106,
    min_count: int = 20,
    rng=None,
) -> RatingMatrix:
    """Ratings from a smooth latent-position model.

    Users and movies carry latent positions on the unit interval; the rating
    of user ``u`` for movie ``v`` is a noisy, rounded
    ``3.5 + b_v + 1.2 cos(2 pi (u - v))``.  Movie popularity is heavy-tailed
    and every user rates at least ``min_count`` movies.
    """
    if rng is None:
        raise ValidationError("synthetic ratings need an explicit generator")
    u = rng.random(n_users)
    v = rng.random(n_movies)
    bias = 0.5 * rng.standard_normal(n_movies)
    pop = 1.0 / (np.arange(n_movies) + 10.0)
    pop = pop[rng.permutation(n_movies)]
    pop /= pop.sum()
    extra = rng.exponential(max(mean_count - min_count, 1), n_users)
    counts = np.minimum(min_count + extra.astype(int), n_movies)
    users, movies, ratings = [], [], []
    for i in range(n_users):
        ms = np.sort(rng.choice(n_movies, size=counts[i], replace=False, p=pop))
        score = 3.5 + bias[ms] + 1.2 * np.cos(2 * np.pi * (u[i] - v[ms])) + 0.6 * rng.standard_normal(len(ms))
        users.append(np.full(len(ms), i))
        movies.append(ms)
        ratings.append(np.clip(np.rint(score), 1, 5))
    return RatingMatrix(np.concatenate(users), np.concatenate(movies), np.concatenate(ratings), n_users, n_movies)


def exp_movie_from_config(cfg: ExperimentConfig) -> ConvergenceReport:
    """Run the transfer experiment on ``cfg.data`` (a u.data path or ``synthetic``)."""
    if cfg.data is None:
        raise MissingDataError(FETCH_INSTRUCTIONS)
    if cfg.data == "synthetic":
        R = synthetic_ratings(rng=derive_rng(cfg.master_seed, 2000, 0, 0))
    else:
        R = parse_ratings(cfg.data)
    report, base = exp_movie(
        R, cfg.n_list, cfg.K_list, cfg.master_seed, cfg.k_nn, cfg.symmetrize, cfg.ridge
    )
    report.base = base
    return report


def write_movie_table(report: ConvergenceReport, base: dict, path) -> None:
    """One row per ``K``: base RMSE then the mean relative RMSE difference for each ``n``."""
    ns = sorted({r[1] for r in report.rows})
    with open(path, "w", newline="") as fh:
        fh.write("# schema=v1\n# experiment=movie_table\n")
        fh.write(",".join(["K", "base_rmse"] + [f"n={n}" for n in ns]) + "\n")
        for K in sorted(base):
            _, vals = report.series("rel_rmse_diff", "mean", K=K)
            fh.write(",".join([str(K), repr(float(base[K]))] + [repr(float(x)) for x in vals]) + "\n")
