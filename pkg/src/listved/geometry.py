"""Vector Euclidean distance of a set of alternatives.

The codeword-error region for L alternatives is the intersection of the
half-spaces ``<n, d_i> >= |d_i|^2 / 2``; its distance from the origin (the
transmitted point) is the VED.  We solve

    minimize |n|^2  subject to  <n, d_i> >= rhs_i,  i = 0..L-1

entirely in multiplier space: the minimiser is ``n* = sum_A lam_i d_i`` for
some active set A, so only the Gram matrix of the d_i is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import EmptyList, EmptyRegion, NumericalFailure, ZeroVector

PINV_CUTOFF = 1e-10
FEAS_TOL = 1e-8
# decisions inside the solvers use a tighter margin than the public KKT check
_SOLVE_TOL = 1e-10
EXHAUSTIVE_MAX_L = 20


@dataclass(frozen=True, eq=False)
class DiffVector:
    """Sparse signal-space vector, ``coords`` maps coordinate -> amplitude."""

    coords: Mapping[int, float]
    sq_norm: float = field(init=False)

    def __post_init__(self):
        clean = {int(k): float(v) for k, v in sorted(self.coords.items()) if v != 0.0}
        object.__setattr__(self, "coords", MappingProxyType(clean))
        object.__setattr__(self, "sq_norm", math.fsum(v * v for v in clean.values()))

    @classmethod
    def from_dense(cls, amplitudes: Iterable[float], start: int = 0) -> DiffVector:
        return cls({start + i: a for i, a in enumerate(amplitudes)})

    @property
    def norm(self) -> float:
        return math.sqrt(self.sq_norm)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.coords)

    def dot(self, other: DiffVector) -> float:
        a, b = self.coords, other.coords
        if len(b) < len(a):
            a, b = b, a
        return math.fsum(v * b[k] for k, v in a.items() if k in b)

    def scaled(self, c: float) -> DiffVector:
        return DiffVector({k: c * v for k, v in self.coords.items()})

    def shifted(self, offset: int) -> DiffVector:
        return DiffVector({k + offset: v for k, v in self.coords.items()})

    def dense(self, support: Sequence[int]) -> np.ndarray:
        return np.array([self.coords.get(k, 0.0) for k in support])

    def __eq__(self, other):
        if not isinstance(other, DiffVector):
            return NotImplemented
        return dict(self.coords) == dict(other.coords)

    def __hash__(self):
        return hash(tuple(self.coords.items()))

    def __repr__(self):
        return f"DiffVector({dict(self.coords)!r})"


@dataclass(frozen=True, eq=False)
class VedProblem:
    vectors: tuple[DiffVector, ...]
    gram: np.ndarray
    rhs: np.ndarray

    @property
    def L(self) -> int:
        return len(self.vectors)

    @property
    def support(self) -> list[int]:
        return sorted(set().union(*(v.coords for v in self.vectors)))

    def dense(self) -> tuple[list[int], np.ndarray]:
        """Return (support, L x m matrix) over the union of the supports."""
        support = self.support
        return support, np.array([v.dense(support) for v in self.vectors])


@dataclass(frozen=True)
class VedSolution:
    ved: float
    ved_sq: float
    nearest_point: DiffVector
    active_set: tuple[int, ...]
    multipliers: tuple[float, ...]
    rank: int


def gram_of(vectors: Sequence[DiffVector]) -> VedProblem:
    vectors = tuple(vectors)
    if not vectors:
        raise EmptyList("at least one difference vector is required")
    for i, v in enumerate(vectors):
        if not v.sq_norm > 0.0:
            raise ZeroVector(f"difference vector {i} is zero")
    n = len(vectors)
    gram = np.empty((n, n))
    for i in range(n):
        gram[i, i] = vectors[i].sq_norm
        for j in range(i + 1, n):
            gram[i, j] = gram[j, i] = vectors[i].dot(vectors[j])
    rhs = np.array([v.sq_norm / 2.0 for v in vectors])
    return VedProblem(vectors, gram, rhs)


def rank_of(problem: VedProblem, tol: float = 1e-10) -> int:
    w = np.linalg.eigvalsh(problem.gram)
    return int(np.count_nonzero(w > tol * w[-1]))


def _psd_solve(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of G x = b for symmetric PSD G (pseudo-inverse)."""
    if G.shape[0] == 1:
        return b / G[0, 0]
    w, V = np.linalg.eigh(G)
    keep = w > PINV_CUTOFF * w[-1]
    Vk = V[:, keep]
    return Vk @ ((Vk.T @ b) / w[keep])


def _exhaustive(G: np.ndarray, b: np.ndarray, tol: float):
    L = len(b)
    for k in range(1, L + 1):
        for A in combinations(range(L), k):
            idx = list(A)
            lam = _psd_solve(G[np.ix_(idx, idx)], b[idx])
            if lam.min() < -tol * max(lam.max(), 1.0):
                continue
            lam = np.maximum(lam, 0.0)
            proj = G[:, idx] @ lam
            if np.any(proj < b * (1.0 - tol)):
                continue
            if np.any(np.abs(proj[idx] - b[idx]) > tol * b[idx]):
                continue
            return A, lam
    return None


def _iterative(G: np.ndarray, b: np.ndarray, tol: float):
    """Dual active-set method (Goldfarb-Idnani) for the min-norm problem.

    The active normals stay linearly independent; a constraint whose normal
    lies in their span triggers a pure dual step that drops one of them.
    """
    L = len(b)
    scale = np.sqrt(np.diag(G))
    active: list[int] = []
    u = np.zeros(L)
    cap = 50 * L
    steps = 0
    while True:
        gap = b - G @ u
        if np.all(gap <= tol * b):
            break
        # hyperplane distance of every violated constraint; lowest index wins ties
        dist = np.where(gap > tol * b, gap / scale, -np.inf)
        p = int(np.argmax(dist))
        while True:
            steps += 1
            if steps > cap:
                raise NumericalFailure(f"active-set iteration cap {cap} reached")
            if active:
                GA = G[np.ix_(active, active)]
                r = np.linalg.solve(GA, G[active, p])
                z_sq = G[p, p] - G[p, active] @ r
            else:
                r = np.zeros(0)
                z_sq = G[p, p]
            s = b[p] - G[p] @ u
            full = s / z_sq if z_sq > PINV_CUTOFF * G[p, p] else math.inf
            partial, drop = math.inf, -1
            for pos, i in enumerate(active):
                if r[pos] > 0.0:
                    t = u[i] / r[pos]
                    if t < partial:
                        partial, drop = t, pos
            if math.isinf(full) and math.isinf(partial):
                # d_p = sum r_i d_i with r <= 0 over tight constraints: certificate of emptiness
                raise EmptyRegion(f"constraint {p} cannot hold together with {sorted(active)}")
            t = min(full, partial)
            for pos, i in enumerate(active):
                u[i] -= t * r[pos]
            u[p] += t
            if full <= partial:
                active.append(p)
                break
            i = active.pop(drop)
            u[i] = 0.0
    A = sorted(active)
    # polish: re-solve the (independent) active system exactly
    lam = np.linalg.solve(G[np.ix_(A, A)], b[A])
    if lam.min() < -tol * max(lam.max(), 1.0):
        raise NumericalFailure("negative multiplier after polishing")
    return tuple(A), np.maximum(lam, 0.0)


def _solve(G: np.ndarray, b: np.ndarray, strategy: str):
    if strategy == "exhaustive":
        if len(b) > EXHAUSTIVE_MAX_L:
            raise ValueError(f"exhaustive strategy supports L <= {EXHAUSTIVE_MAX_L}")
        found = _exhaustive(G, b, _SOLVE_TOL) or _exhaustive(G, b, FEAS_TOL)
        if found is None:
            _iterative(G, b, _SOLVE_TOL)  # raises EmptyRegion when that is the cause
            raise NumericalFailure("no candidate active set passed the KKT checks")
        return found
    if strategy == "iterative":
        return _iterative(G, b, _SOLVE_TOL)
    raise ValueError(f"unknown strategy {strategy!r}")


def ved_sq_of_gram(gram: np.ndarray, rhs: np.ndarray | None = None, strategy: str = "exhaustive") -> float:
    """Squared VED straight from a Gram matrix (no vectors needed)."""
    gram = np.asarray(gram, dtype=float)
    b = np.diag(gram) / 2.0 if rhs is None else np.asarray(rhs, dtype=float)
    A, lam = _solve(gram, b, strategy)
    return float(lam @ b[list(A)])


def _psd_solve_batch(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(G)
    keep = w > PINV_CUTOFF * w[..., -1:]
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    return np.einsum("nij,nj->ni", V, inv * np.einsum("nji,nj->ni", V, b))


def ved_sq_batch(grams: np.ndarray) -> np.ndarray:
    """Squared VED for a stack of (N, L, L) Gram matrices with rhs = diag / 2.

    Same active-set enumeration and tie rules as the exhaustive strategy,
    vectorised over the stack.
    """
    grams = np.asarray(grams, dtype=float)
    N, L, _ = grams.shape
    b = np.diagonal(grams, axis1=1, axis2=2) / 2.0
    out = np.full(N, np.nan)
    todo = np.ones(N, dtype=bool)
    for k in range(1, L + 1):
        for A in combinations(range(L), k):
            rows = np.flatnonzero(todo)
            if rows.size == 0:
                return out
            idx = list(A)
            G = grams[rows]
            bA = b[rows][:, idx]
            if k == 1:
                lam = bA / G[:, idx, idx]
            else:
                lam = _psd_solve_batch(G[:, idx][:, :, idx], bA)
            proj = np.einsum("nij,nj->ni", G[:, :, idx], lam)
            br = b[rows]
            ok = lam.min(axis=1) >= -_SOLVE_TOL * np.maximum(lam.max(axis=1), 1.0)
            ok &= np.all(proj >= br * (1.0 - _SOLVE_TOL), axis=1)
            ok &= np.all(np.abs(proj[:, idx] - bA) <= _SOLVE_TOL * bA, axis=1)
            hit = rows[ok]
            out[hit] = np.einsum("ni,ni->n", np.maximum(lam[ok], 0.0), bA[ok])
            todo[hit] = False
    for r in np.flatnonzero(todo):
        out[r] = ved_sq_of_gram(grams[r])
    return out


def ved(problem: VedProblem, strategy: str = "exhaustive") -> VedSolution:
    A, lam = _solve(problem.gram, problem.rhs, strategy)
    point: dict[int, float] = {}
    for i, li in zip(A, lam):
        for k, v in problem.vectors[i].coords.items():
            point[k] = point.get(k, 0.0) + li * v
    ved_sq = float(lam @ problem.rhs[list(A)])
    return VedSolution(
        ved=math.sqrt(ved_sq),
        ved_sq=ved_sq,
        nearest_point=DiffVector(point),
        active_set=tuple(A),
        multipliers=tuple(float(x) for x in lam),
        rank=rank_of(problem),
    )


def kkt_residuals(problem: VedProblem, sol: VedSolution) -> dict[str, float]:
    """Relative KKT residuals recomputed from the sparse vectors."""
    n = sol.nearest_point
    combo: dict[int, float] = {}
    for i, li in zip(sol.active_set, sol.multipliers):
        for k, v in problem.vectors[i].coords.items():
            combo[k] = combo.get(k, 0.0) + li * v
    keys = set(combo) | set(n.coords)
    diff = math.sqrt(math.fsum((combo.get(k, 0.0) - n.coords.get(k, 0.0)) ** 2 for k in keys))
    proj = np.array([n.dot(d) for d in problem.vectors])
    rhs = problem.rhs
    lam = np.array(sol.multipliers)
    act = list(sol.active_set)
    return {
        "stationarity": diff / max(n.norm, 1e-300),
        "feasibility": float(np.max(np.maximum(rhs - proj, 0.0) / rhs)),
        "complementarity": float(np.max(np.abs(proj[act] - rhs[act]) / rhs[act])),
        "dual": float(max(0.0, -lam.min()) / max(lam.max(), 1e-300)),
        "objective": abs(sol.ved_sq - float(lam @ rhs[act])) / sol.ved_sq,
        "norm": abs(n.sq_norm - sol.ved_sq) / sol.ved_sq,
    }


def check_kkt(problem: VedProblem, sol: VedSolution, tol: float = FEAS_TOL) -> bool:
    return all(r <= tol for r in kkt_residuals(problem, sol).values())


def simplex_ved(L: int, delta: float) -> float:
    """Vertex-to-centroid distance of a regular L-simplex with edge ``delta``."""
    if L < 1 or delta <= 0:
        raise ValueError("need L >= 1 and delta > 0")
    return delta * math.sqrt(L / (2.0 * (L + 1)))


def simplex_vectors(L: int, delta: float) -> list[DiffVector]:
    """Differences from vertex 0 of a regular simplex with edge ``delta``.

    Vertices are ``delta/sqrt(2) * e_k`` in R^(L+1), so every pair of
    differences has inner product ``delta^2 / 2``.
    """
    a = delta / math.sqrt(2.0)
    return [DiffVector({0: -a, i: a}) for i in range(1, L + 1)]


def ved_bruteforce(problem: VedProblem, iterations: int = 100_000, seed: int = 0) -> float:
    """Independent VED estimate by Dykstra's alternating projections.

    Several passes with random cyclic orders share the ``iterations`` budget
    (counted in single half-space projections).  The near-tight constraints at
    each end point are then projected onto directly (dense least squares),
    which fixes the slow crawl of Dykstra between almost opposite hyperplanes.
    A general-purpose SLSQP run from the last Dykstra point covers the cases
    where even that crawl ends outside the region.  Every candidate is scaled
    onto the feasible region before its norm is taken, so the estimate never
    undercuts the true VED.
    """
    _, D = problem.dense()
    b = problem.rhs
    sq = np.einsum("ij,ij->i", D, D)
    L, m = D.shape
    rng = np.random.default_rng(seed)
    starts = 4
    per_start = max(iterations // starts, 10 * L)
    best = math.inf

    def feasible_norm(x):
        proj = D @ x
        if np.any(proj <= 0.0):
            return math.inf
        return max(1.0, float(np.max(b / proj))) * float(np.linalg.norm(x))

    for s in range(starts):
        order = np.arange(L) if s == 0 else rng.permutation(L)
        x = np.zeros(m)
        incr = np.zeros((L, m))
        used = 0
        while used < per_start:
            prev = x.copy()
            for i in order:
                y = x + incr[i]
                viol = b[i] - D[i] @ y
                x = y + (viol / sq[i]) * D[i] if viol > 0.0 else y
                incr[i] = y - x
            used += L
            if np.linalg.norm(x - prev) <= 1e-15 * max(np.linalg.norm(x), 1.0):
                break
        best = min(best, feasible_norm(x))
        slack = (D @ x - b) / b
        for thresh in (1e-9, 1e-6, 1e-3, 1e-1, 1.0):
            tight = np.flatnonzero(slack <= thresh)
            if tight.size:
                xa = np.linalg.lstsq(D[tight], b[tight], rcond=None)[0]
                best = min(best, feasible_norm(xa))
    res = minimize(
        lambda v: v @ v,
        x,
        jac=lambda v: 2.0 * v,
        constraints=[{"type": "ineq", "fun": lambda v: D @ v - b, "jac": lambda v: D}],
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-15},
    )
    best = min(best, feasible_norm(res.x))
    slack = (D @ res.x - b) / b
    tight = np.flatnonzero(slack <= 1e-6)
    if tight.size:
        best = min(best, feasible_norm(np.linalg.lstsq(D[tight], b[tight], rcond=None)[0]))
    return best


def read_vector_file(path) -> list[DiffVector]:
    """One vector per line, whitespace-separated dense amplitudes, ``#`` comments."""
    vectors = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                vectors.append(DiffVector.from_dense(float(t) for t in line.split()))
    return vectors
