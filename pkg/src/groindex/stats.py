"""Small deterministic statistics: correlation, OLS, covariance PCA, clustering, ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Mapping, Optional, Sequence

import numpy as np


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def predict(self, x: float) -> float:
        return self.intercept + self.slope * x


@dataclass(frozen=True)
class PcaResult:
    eigenvalues: np.ndarray        # descending
    components: np.ndarray         # column j is the j-th loading vector
    scores: np.ndarray             # n x p
    explained_fraction: np.ndarray
    covariance: np.ndarray
    sweeps: int = 0


# -- correlation and regression ---------------------------------------------


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise StatsError(f"need two vectors of equal length, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise StatsError("need at least two points")
    return x, y


def _centered_sums(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    dx = x - math.fsum(x) / len(x)
    dy = y - math.fsum(y) / len(y)
    return math.fsum(dx * dx), math.fsum(dy * dy), math.fsum(dx * dy)


def pearson(x, y) -> float:
    x, y = _as_pair(x, y)
    sxx, syy, sxy = _centered_sums(x, y)
    if sxx == 0 or syy == 0:
        raise StatsError("correlation undefined: zero variance")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def ols(x, y) -> RegressionResult:
    """Least-squares line y = intercept + slope * x.

    A constant y is an exact fit and reports r_squared = 1.
    """
    x, y = _as_pair(x, y)
    sxx, syy, sxy = _centered_sums(x, y)
    if sxx == 0:
        raise StatsError("regression undefined: x has zero variance")
    slope = sxy / sxx
    intercept = math.fsum(y) / len(y) - slope * math.fsum(x) / len(x)
    r2 = 1.0 if syy == 0 else min(1.0, sxy * sxy / (sxx * syy))
    return RegressionResult(slope, intercept, r2, len(x))


def log_transform(values, labels: Optional[Sequence[str]] = None) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~(v > 0))
    if bad.size:
        i = int(bad[0])
        who = labels[i] if labels is not None else f"index {i}"
        raise StatsError(f"logarithm of nonpositive value {v[i]} for {who}")
    return np.log(v)


# -- eigen decomposition / PCA ---------------------------------------------


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decompose a symmetric matrix with cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below ``tol`` times
    the norm of the matrix. Returns (eigenvalues, eigenvectors, sweeps) with
    eigenvectors as columns, unsorted.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise StatsError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise StatsError("matrix must be symmetric")
    a = (a + a.T) / 2
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0:
        return np.zeros(n), v, 0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        # summed directly: total minus diagonal cancels catastrophically
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            return np.diag(a).copy(), v, sweeps - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise StatsError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def covariance_pca(data) -> PcaResult:
    """PCA on the covariance matrix of column-centered (unscaled) data.

    Each component is signed so that its largest-magnitude loading is positive.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise StatsError("data must be a 2-D matrix")
    n, p = x.shape
    if n < 2 or p < 1:
        raise StatsError(f"need at least 2 observations and 1 variable, got {n}x{p}")
    if not np.all(np.isfinite(x)):
        raise StatsError("data contains NaN or infinite entries")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2
    vals, vecs, sweeps = jacobi_eigh(cov)
    # stable sort: equal eigenvalues keep variable order
    order = sorted(range(p), key=lambda i: -vals[i])
    vals = vals[order]
    vecs = vecs[:, order]
    # covariance is PSD; negative values are rounding noise
    vals = np.where(vals < 0, 0.0, vals)
    for j in range(p):
        col = vecs[:, j]
        k = int(np.argmax(np.abs(col)))
        if col[k] < 0:
            vecs[:, j] = -col
    total = vals.sum()
    frac = vals / total if total > 0 else np.zeros(p)
    return PcaResult(vals, vecs, centered @ vecs, frac, cov, sweeps)


# -- hierarchical clustering -----------------------------------------------


class Linkage(str, Enum):
    AVERAGE = "average"
    COMPLETE = "complete"
    WARD = "ward"


class Distance(str, Enum):
    EUCLIDEAN = "euclidean"
    ONE_MINUS_PEARSON = "one_minus_pearson"


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge list in scipy's convention: leaves are 0..n-1, merge i creates cluster n+i."""

    n_leaves: int
    merges: tuple[Merge, ...]

    def cut(self, k: int) -> list[int]:
        """Flat cluster labels for ``k`` clusters, numbered by first leaf appearance."""
        n = self.n_leaves
        if not 1 <= k <= n:
            raise StatsError(f"cannot cut {n} leaves into {k} clusters")
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        rep = {i: i for i in range(n)}  # cluster id -> a leaf inside it
        for i, m in enumerate(self.merges[: n - k]):
            ra, rb = find(rep[m.a]), find(rep[m.b])
            parent[max(ra, rb)] = min(ra, rb)
            rep[n + i] = min(ra, rb)
        labels: dict[int, int] = {}
        out = []
        for i in range(n):
            root = find(i)
            out.append(labels.setdefault(root, len(labels)))
        return out

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        def label(c):
            if c < self.n_leaves:
                return names[c] if names is not None else str(c)
            return f"#{c}"

        lines = [f"{'step':>4}  {'height':>14}  {'size':>4}  members"]
        for i, m in enumerate(self.merges):
            lines.append(
                f"{self.n_leaves + i:>4}  {m.height:>14.8f}  {m.size:>4}  {label(m.a)} + {label(m.b)}"
            )
        return "\n".join(lines) + "\n"


def distance_matrix(x: np.ndarray, distance: Distance) -> np.ndarray:
    distance = Distance(distance)
    if distance is Distance.EUCLIDEAN:
        diff = x[:, None, :] - x[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=2))
    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered ** 2).sum(axis=1))
    if np.any(norms == 0):
        i = int(np.flatnonzero(norms == 0)[0])
        raise StatsError(f"item {i} has zero variance; Pearson distance undefined")
    u = centered / norms[:, None]
    d = 1.0 - np.clip(u @ u.T, -1.0, 1.0)
    np.fill_diagonal(d, 0.0)
    return d


def hcluster(profiles, linkage: Linkage = Linkage.AVERAGE,
             distance: Distance = Distance.ONE_MINUS_PEARSON) -> Dendrogram:
    """Agglomerative clustering with Lance-Williams updates.

    Ties on the merge height go to the lexicographically smallest pair of
    cluster ids. Ward uses the scipy-style update on the chosen distance.
    """
    x = np.asarray(profiles, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise StatsError("need at least two items to cluster")
    if not np.all(np.isfinite(x)):
        raise StatsError("profiles contain NaN or infinite entries")
    linkage = Linkage(linkage)
    n = x.shape[0]
    base = distance_matrix(x, distance)
    dist: dict[tuple[int, int], float] = {
        (i, j): float(base[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges = []
    for step in range(n - 1):
        best = None
        for key in sorted(dist):
            d = dist[key]
            if best is None or d < best[1]:
                best = (key, d)
        (a, b), h = best
        new = n + step
        na, nb = size[a], size[b]
        active.remove(a)
        active.remove(b)
        for k in active:
            dak = dist.pop((min(a, k), max(a, k)))
            dbk = dist.pop((min(b, k), max(b, k)))
            if linkage is Linkage.AVERAGE:
                d = (na * dak + nb * dbk) / (na + nb)
            elif linkage is Linkage.COMPLETE:
                d = max(dak, dbk)
            else:
                nk = size[k]
                t = na + nb + nk
                d = math.sqrt(max(0.0, ((na + nk) * dak ** 2 + (nb + nk) * dbk ** 2 - nk * h ** 2) / t))
            dist[(k, new)] = d
        del dist[(a, b)]
        size[new] = na + nb
        active.append(new)
        merges.append(Merge(a, b, h, na + nb))
    return Dendrogram(n, tuple(merges))


# -- ranking ----------------------------------------------------------------


def rank_desc(values: Mapping[Hashable, float]) -> dict:
    """Competition ranking, largest value first.

    Ties share the best rank and the following rank is skipped. The returned
    dict is ordered by (rank, key).
    """
    if not values:
        raise StatsError("nothing to rank")
    ordered = sorted(values.items(), key=lambda kv: (-kv[1], kv[0]))
    ranks = {}
    prev = None
    rank = 0
    for pos, (key, v) in enumerate(ordered, start=1):
        if prev is None or v != prev:
            rank = pos
            prev = v
        ranks[key] = rank
    return ranks
