"""Adaptive sparse polynomial interpolation on lower index sets.

Vector-valued functions on the cube [-1, 1]^J are interpolated by Newton-form
tensor polynomials anchored at a nested sequence of real projected Leja
points.  Index sets are lower (downward closed): admitting a multi-index only
after all its backward neighbors keeps every prefix of the admission order a
valid interpolation set, so surrogates built with a larger budget extend
smaller ones without recomputation.

The greedy driver :func:`adapt` scores the admissible neighbors of the
current set by the size of their hierarchical surplus and admits the largest;
:func:`build_from_set` computes surpluses for a fixed, externally chosen set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RLejaFamily",
    "Surrogate",
    "AdaptReport",
    "rleja_nodes",
    "grid_point",
    "is_lower",
    "lower_neighbors",
    "iso_set",
    "adapt",
    "build_from_set",
    "lebesgue_estimate",
    "save_surrogate",
    "load_surrogate",
]

_DEDUP_TOL = 1e-12
_SUP_GRID = 4097


def rleja_nodes(n: int) -> np.ndarray:
    """First ``n`` distinct real projections of the bit-reversed unit circle.

    Candidate ``j`` is ``cos(pi * sum_k j_k 2^-k)`` over the binary digits
    ``j = sum_k j_k 2^k``; duplicates within 1e-12 are dropped, keeping first
    occurrences.  The sequence starts 1, -1, 0, sqrt(2)/2, -sqrt(2)/2, ...
    and is nested by construction.
    """
    if n < 0:
        raise ValueError("node count must be nonnegative")
    out: list[float] = []
    j = 0
    while len(out) < n:
        t, bit, jj = 0.0, 1.0, j
        while jj:
            if jj & 1:
                t += bit
            bit *= 0.5
            jj >>= 1
        z = float(np.cos(np.pi * t))
        if all(abs(z - w) > _DEDUP_TOL for w in out):
            out.append(z)
        j += 1
    return np.array(out)


class RLejaFamily:
    """Shared univariate interpolation data for the projected Leja sequence.

    Caches the node sequence, the Newton denominators
    ``prod_{j<k} (z_k - z_j)``, the sup norms of the Newton basis functions
    ``h_k`` on a fixed probe grid, and the table of ``h_d`` values at the
    nodes themselves; all grow lazily with the requested degree.
    """

    def __init__(self):
        self._nodes = np.empty(0)
        self._next_candidate = 0
        self._denoms: list[float] = []
        self._sup: list[float] = []
        self._node_table = np.ones((1, 1))

    def nodes(self, n: int) -> np.ndarray:
        """The first ``n`` nodes."""
        while len(self._nodes) < n:
            self._extend()
        return self._nodes[:n]

    def _extend(self):
        have = len(self._nodes)
        fresh = rleja_nodes(max(2 * have, 8))
        self._nodes = fresh

    def newton_denominator(self, k: int) -> float:
        nodes = self.nodes(k + 1)
        while len(self._denoms) <= k:
            d = len(self._denoms)
            self._denoms.append(float(np.prod(nodes[d] - nodes[:d])) if d else 1.0)
        return self._denoms[k]

    def h_values(self, degree: int, z: np.ndarray) -> np.ndarray:
        """Evaluate the Newton basis function of the given degree."""
        z = np.asarray(z, dtype=float)
        nodes = self.nodes(degree + 1)
        p = np.ones_like(z)
        for j in range(degree):
            p = p * (z - nodes[j])
        return p / self.newton_denominator(degree)

    def newton_table(self, max_degree: int, z: np.ndarray) -> np.ndarray:
        """All basis values ``h_d(z)`` for ``d = 0..max_degree``.

        Returns an array of shape ``z.shape + (max_degree + 1,)``.
        """
        z = np.asarray(z, dtype=float)
        nodes = self.nodes(max_degree + 1)
        out = np.empty(z.shape + (max_degree + 1,))
        p = np.ones_like(z)
        out[..., 0] = p
        for d in range(1, max_degree + 1):
            p = p * (z - nodes[d - 1])
            out[..., d] = p / self.newton_denominator(d)
        return out

    def sup_norms(self, max_degree: int) -> np.ndarray:
        """Sup norms of ``h_0 .. h_max_degree`` on [-1, 1].

        Estimated on a fixed uniform probe grid of 4097 points joined with
        the nodes entering each basis function; cached per degree.
        """
        while len(self._sup) <= max_degree:
            d = len(self._sup)
            nodes = self.nodes(d + 1)
            grid = np.concatenate([np.linspace(-1.0, 1.0, _SUP_GRID), nodes])
            self._sup.append(float(np.max(np.abs(self.h_values(d, grid)))))
        return np.array(self._sup[: max_degree + 1])

    def node_h_table(self, max_degree: int, max_node: int) -> np.ndarray:
        """Table ``T[d, c] = h_d(z_c)`` for degrees and node positions."""
        D, C = self._node_table.shape
        if max_degree >= D or max_node >= C:
            D = max(max_degree + 1, 2 * D)
            C = max(max_node + 1, 2 * C)
            self._node_table = self.newton_table(D - 1, self.nodes(C)).T.copy()
        return self._node_table


def grid_point(family: RLejaFamily, nu) -> np.ndarray:
    """Interpolation node of a multi-index: coordinate ``j`` gets node ``nu_j``."""
    nu = np.asarray(nu, dtype=int)
    nodes = family.nodes(int(nu.max()) + 1 if nu.size else 1)
    return nodes[nu]


def is_lower(indices) -> bool:
    """Whether the set of multi-indices is downward closed."""
    idx = {tuple(nu) for nu in indices}
    for nu in idx:
        for j, d in enumerate(nu):
            if d > 0 and nu[:j] + (d - 1,) + nu[j + 1 :] not in idx:
                return False
    return True


def lower_neighbors(indices) -> list[tuple[int, ...]]:
    """Admissible extensions of a lower set, in lexicographic order.

    A multi-index outside the set is admissible when all its backward
    neighbors belong to the set, so adding it keeps the set lower.
    """
    idx = {tuple(nu) for nu in indices}
    out = set()
    for nu in idx:
        for j in range(len(nu)):
            cand = nu[:j] + (nu[j] + 1,) + nu[j + 1 :]
            if cand in idx or cand in out:
                continue
            if _admissible(cand, idx):
                out.add(cand)
    return sorted(out)


def _admissible(nu: tuple, members: set) -> bool:
    for j, d in enumerate(nu):
        if d > 0 and nu[:j] + (d - 1,) + nu[j + 1 :] not in members:
            return False
    return True


def iso_set(J: int, w: int) -> list[tuple[int, ...]]:
    """The isotropic simplex ``{nu : |nu|_1 <= w}`` in lexicographic order."""
    if J < 1 or w < 0:
        raise ValueError("need J >= 1 and w >= 0")
    out: list[tuple[int, ...]] = []

    # lexicographic order enumerates low leading entries first
    def rec_lex(prefix, remaining):
        if len(prefix) == J:
            out.append(prefix)
            return
        for d in range(remaining + 1):
            rec_lex(prefix + (d,), remaining - d)

    rec_lex((), w)
    return out


@dataclass
class Surrogate:
    """Newton-form sparse interpolant of a vector-valued function.

    Attributes
    ----------
    indices : ndarray, shape (N, J)
        Multi-indices in admission order; every prefix is a lower set.
    surpluses : ndarray, shape (N, m)
        Hierarchical surplus of each index.
    family : RLejaFamily
        Univariate node sequence shared by all coordinates.
    """

    indices: np.ndarray
    surpluses: np.ndarray
    family: RLejaFamily = field(repr=False)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.surpluses = np.asarray(self.surpluses, dtype=float)
        if self.indices.ndim != 2 or len(self.indices) != len(self.surpluses):
            raise ValueError("indices and surpluses must have matching leading length")

    @property
    def J(self) -> int:
        return self.indices.shape[1]

    @property
    def m(self) -> int:
        return self.surpluses.shape[1]

    @property
    def N(self) -> int:
        return len(self.indices)

    @property
    def max_degree(self) -> int:
        return int(self.indices.max()) if self.indices.size else 0

    def _check_point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.J:
            raise ValueError(f"point has {y.shape[-1]} coordinates, expected {self.J}")
        if np.any(np.abs(y) > 1.0 + 1e-12):
            raise ValueError("evaluation point leaves the cube [-1, 1]^J")
        return y

    def evaluate(self, y) -> np.ndarray:
        """Value of the interpolant at one point of the cube, shape (m,)."""
        y = self._check_point(np.atleast_1d(y))
        htab = self.family.newton_table(self.max_degree, y)  # (J, D+1)
        vals = htab[np.arange(self.J)[None, :], self.indices]  # (N, J)
        return np.prod(vals, axis=1) @ self.surpluses

    def evaluate_batch(self, Y) -> np.ndarray:
        """Values at many points, shape (n, m)."""
        Y = self._check_point(np.atleast_2d(Y))
        htab = self.family.newton_table(self.max_degree, Y)  # (n, J, D+1)
        H = np.ones((len(Y), self.N))
        for j in range(self.J):
            H *= htab[:, j, self.indices[:, j]]
        return H @ self.surpluses

    def prefix(self, n: int) -> "Surrogate":
        """The surrogate made of the first ``n`` admitted indices."""
        if not 1 <= n <= self.N:
            raise ValueError(f"prefix length {n} outside 1..{self.N}")
        return Surrogate(self.indices[:n], self.surpluses[:n], self.family)


@dataclass
class AdaptReport:
    """Bookkeeping of one greedy construction run."""

    n_admitted: int
    n_evals: int
    trace: list
    frontier_max_score: float
    seconds: float


class _Evaluator:
    """Memoizing wrapper mapping multi-indices to function values."""

    def __init__(self, f, family: RLejaFamily):
        self.f = f
        self.family = family
        self.cache: dict[tuple, np.ndarray] = {}
        self.m: int | None = None

    def __call__(self, nu: tuple) -> np.ndarray:
        val = self.cache.get(nu)
        if val is None:
            raw = np.atleast_1d(np.asarray(self.f(grid_point(self.family, nu)), dtype=float))
            if raw.ndim != 1:
                raise ValueError("function values must be scalars or 1-d arrays")
            if not np.all(np.isfinite(raw)):
                raise ValueError(f"non-finite function value at index {nu}")
            if self.m is None:
                self.m = len(raw)
            elif len(raw) != self.m:
                raise ValueError("function value dimension changed between evaluations")
            val = raw
            self.cache[nu] = val
        return val


def adapt(
    f,
    J: int,
    budget: int,
    *,
    score_norm: str = "l2",
    use_h_factor: bool = True,
    family: RLejaFamily | None = None,
) -> tuple[Surrogate, AdaptReport]:
    """Greedily grow a lower index set to the given budget.

    After admitting an index, its forward neighbors that became admissible
    join the candidate frontier; every candidate's surplus is kept current
    against the growing interpolant.  The next admission maximizes
    ``norm(surplus) * prod_j sup|h_{nu_j}|`` (the basis factor is dropped
    when ``use_h_factor`` is false); exact score ties go to the
    lexicographically smallest index.  Function values are memoized, so
    candidate evaluations are reused on admission.

    Parameters
    ----------
    f : callable
        Maps a point of [-1, 1]^J to a scalar or 1-d array; evaluated only
        at interpolation nodes.
    J : int
        Number of coordinates.
    budget : int
        Number of indices to admit, including the root.
    score_norm : {"l2", "max"}
        Norm applied to vector-valued surpluses when scoring.
    use_h_factor : bool
        Include the product of univariate basis sup norms in the score.

    Returns
    -------
    (Surrogate, AdaptReport)
    """
    if J < 1 or budget < 1:
        raise ValueError("need J >= 1 and budget >= 1")
    if score_norm not in ("l2", "max"):
        raise ValueError(f"unknown score norm {score_norm!r}")
    start = time.perf_counter()
    family = family or RLejaFamily()
    ev = _Evaluator(f, family)

    root = (0,) * J
    root_val = ev(root)
    m = ev.m
    lam_pos = {root: 0}
    lam_idx = np.zeros((budget, J), dtype=int)
    lam_sur = np.zeros((budget, m))
    lam_sur[0] = root_val
    n_adm = 1

    cand_keys: list[tuple] = []
    cand_idx = np.zeros((0, J), dtype=int)
    cand_f = np.zeros((0, m))
    cand_i = np.zeros((0, m))
    trace = []

    def expand(last: tuple):
        nonlocal cand_idx, cand_f, cand_i
        fresh = []
        for j in range(J):
            cand = last[:j] + (last[j] + 1,) + last[j + 1 :]
            if cand in lam_pos or cand in cand_keys_set:
                continue
            if _admissible(cand, lam_pos.keys()):
                fresh.append(cand)
        if not fresh:
            return
        rows_f = np.array([ev(c) for c in fresh])
        new_idx = np.array(fresh, dtype=int)
        tbl = family.node_h_table(int(lam_idx[:n_adm].max(initial=0)), int(new_idx.max()))
        rows_i = np.empty((len(fresh), m))
        for r, c in enumerate(new_idx):
            h = np.prod(tbl[lam_idx[:n_adm], np.broadcast_to(c, (n_adm, J))], axis=1)
            rows_i[r] = h @ lam_sur[:n_adm]
        cand_keys.extend(fresh)
        cand_keys_set.update(fresh)
        cand_idx = np.vstack([cand_idx, new_idx])
        cand_f = np.vstack([cand_f, rows_f])
        cand_i = np.vstack([cand_i, rows_i])

    cand_keys_set: set = set()
    expand(root)

    while n_adm < budget:
        diff = cand_f - cand_i
        if score_norm == "l2":
            scores = np.linalg.norm(diff, axis=1)
        else:
            scores = np.max(np.abs(diff), axis=1)
        if use_h_factor:
            sup = family.sup_norms(int(cand_idx.max(initial=0)))
            scores = scores * np.prod(sup[cand_idx], axis=1)
        best = scores.max()
        winner = min(cand_keys[r] for r in np.flatnonzero(scores == best))
        r = cand_keys.index(winner)

        surplus = cand_f[r] - cand_i[r]
        lam_idx[n_adm] = cand_idx[r]
        lam_sur[n_adm] = surplus
        lam_pos[winner] = n_adm
        n_adm += 1
        trace.append((n_adm, winner, float(best)))

        keep = np.arange(len(cand_keys)) != r
        cand_idx = cand_idx[keep]
        cand_f = cand_f[keep]
        cand_i = cand_i[keep]
        cand_keys.pop(r)
        cand_keys_set.discard(winner)

        if len(cand_keys):
            tbl = family.node_h_table(int(max(winner)), int(cand_idx.max()))
            h = np.prod(tbl[np.asarray(winner, int)[None, :], cand_idx], axis=1)
            cand_i += np.outer(h, surplus)

        expand(winner)

    if len(cand_keys):
        diff = cand_f - cand_i
        resid = np.linalg.norm(diff, axis=1) if score_norm == "l2" else np.max(np.abs(diff), axis=1)
        if use_h_factor:
            sup = family.sup_norms(int(cand_idx.max(initial=0)))
            resid = resid * np.prod(sup[cand_idx], axis=1)
        frontier_max = float(resid.max())
    else:
        frontier_max = 0.0

    surr = Surrogate(lam_idx[:n_adm].copy(), lam_sur[:n_adm].copy(), family)
    report = AdaptReport(
        n_admitted=n_adm,
        n_evals=len(ev.cache),
        trace=trace,
        frontier_max_score=frontier_max,
        seconds=time.perf_counter() - start,
    )
    return surr, report


def build_from_set(f, indices, family: RLejaFamily | None = None) -> Surrogate:
    """Compute surpluses for a fixed lower set in the given order.

    Every prefix of the order must itself be a lower set (sorting any lower
    set lexicographically satisfies this).  The result matches :func:`adapt`
    restricted to the same admission order.
    """
    family = family or RLejaFamily()
    keys = [tuple(int(d) for d in nu) for nu in indices]
    if not keys:
        raise ValueError("index set must not be empty")
    J = len(keys[0])
    seen: set = set()
    for nu in keys:
        if len(nu) != J or min(nu) < 0:
            raise ValueError(f"bad multi-index {nu}")
        if nu in seen or not _admissible(nu, seen):
            raise ValueError(
                f"index {nu}: every prefix of the order must be a lower set"
            )
        seen.add(nu)

    ev = _Evaluator(f, family)
    idx = np.array(keys, dtype=int)
    vals = np.array([ev(nu) for nu in keys])
    N, m = len(keys), ev.m
    sur = np.empty((N, m))
    tbl = family.node_h_table(int(idx.max()), int(idx.max()))
    sur[0] = vals[0]
    for n in range(1, N):
        h = np.prod(tbl[idx[:n], np.broadcast_to(idx[n], (n, J))], axis=1)
        sur[n] = vals[n] - h @ sur[:n]
    return Surrogate(idx, sur, family)


def lebesgue_estimate(n: int, grid_points: int = _SUP_GRID) -> float:
    """Estimate the Lebesgue constant of degree-``n`` interpolation.

    Maximizes ``sum_k |l_k|`` over a uniform probe grid joined with the
    nodes, where ``l_k`` are the Lagrange basis polynomials on the first
    ``n + 1`` nodes.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    z = rleja_nodes(n + 1)
    probe = np.concatenate([np.linspace(-1.0, 1.0, grid_points), z])
    total = np.zeros_like(probe)
    for k in range(n + 1):
        lk = np.ones_like(probe)
        for j in range(n + 1):
            if j != k:
                lk *= (probe - z[j]) / (z[k] - z[j])
        total += np.abs(lk)
    return float(total.max())


def save_surrogate(surr: Surrogate, path) -> None:
    """Write a surrogate as text; the file reloads to identical values.

    Header line ``J m N nodes=rleja``, then one record per admitted index:
    the multi-index, a ``|`` separator, and the surplus vector in full
    decimal precision.
    """
    with open(path, "w") as fh:
        fh.write(f"{surr.J} {surr.m} {surr.N} nodes=rleja\n")
        for nu, alpha in zip(surr.indices, surr.surpluses):
            left = " ".join(str(int(d)) for d in nu)
            right = " ".join(f"{a:.17g}" for a in alpha)
            fh.write(f"{left} | {right}\n")


def load_surrogate(path) -> Surrogate:
    """Parse a surrogate file written by :func:`save_surrogate`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[3] != "nodes=rleja":
            raise ValueError(f"bad surrogate header: {' '.join(header)!r}")
        J, m, N = (int(x) for x in header[:3])
        indices = np.empty((N, J), dtype=int)
        surpluses = np.empty((N, m))
        for n in range(N):
            line = fh.readline()
            if not line:
                raise ValueError(f"surrogate file ends after {n} of {N} records")
            left, _, right = line.partition("|")
            nu = [int(x) for x in left.split()]
            alpha = [float(x) for x in right.split()]
            if len(nu) != J or len(alpha) != m:
                raise ValueError(f"record {n} has wrong arity")
            indices[n] = nu
            surpluses[n] = alpha
    keys = [tuple(nu) for nu in indices]
    seen: set = set()
    for nu in keys:
        if nu in seen or not _admissible(nu, seen):
            raise ValueError("surrogate file indices are not in lower-set order")
        seen.add(nu)
    return Surrogate(indices, surpluses, RLejaFamily())
