"""Finite-element forward model for boundary electrode measurements.

The potential solves a conservation law ``-div(sigma grad v) = 0`` inside the
unit square; each electrode carries an unknown constant voltage ``V_k``
coupled to the interior through a contact admittance that rises linearly from
zero at the electrode endpoints to a peak at its midpoint.  Discretization is
by P1 elements on the structured meshes of :mod:`eitmcmc.geometry`, with the
electrode voltages and one grounding multiplier appended to the nodal
unknowns, so the assembled system stays symmetric.

Driving current patterns ``e_1 - e_{k+1}`` for ``k = 1..K-1`` and collecting
all electrode voltages yields the forward map into ``R^{K(K-1)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csc_matrix
from scipy.sparse.linalg import minres, splu

from eitmcmc.geometry import ElectrodeLayout, Mesh, boundary_arc_intervals
from eitmcmc.priors import sigma_eval

__all__ = [
    "AssembledSystem",
    "ForwardOutput",
    "ForwardSolver",
    "ParametricForward",
    "admittance_at",
    "assemble",
    "solve_patterns",
    "forward_map",
    "standard_patterns",
    "write_voltage_file",
    "read_voltage_file",
]

_PATTERN_TOL = 1e-12
_ITERATIVE_TOL = 1e-10


def standard_patterns(K: int) -> np.ndarray:
    """The K-1 current patterns ``e_1 - e_{k+1}``, one per row."""
    patterns = np.zeros((K - 1, K))
    patterns[:, 0] = 1.0
    patterns[np.arange(K - 1), np.arange(1, K)] = -1.0
    return patterns


def admittance_at(layout: ElectrodeLayout, s: float, zeta_max: float = 1.0) -> float:
    """Contact admittance at perimeter coordinate ``s``.

    The boundary is parametrized by ``s in [0, 4)``: the integer part selects
    the side (counterclockwise from the bottom), the fractional part is the
    arc coordinate along it.  On each electrode the profile is a hat, zero at
    the endpoints and ``zeta_max`` at the midpoint; elsewhere it vanishes.
    """
    side, t = divmod(float(s) % 4.0, 1.0)
    for k_side, start, end in layout.intervals:
        if int(k_side) != int(side):
            continue
        if start <= t <= end:
            return zeta_max * _hat(t, start, end)
    return 0.0


def _hat(t: float, start: float, end: float) -> float:
    mid = 0.5 * (start + end)
    if t <= mid:
        return (t - start) / (mid - start)
    return (end - t) / (end - mid)


@dataclass
class AssembledSystem:
    """Sparse symmetric system over nodal potentials, voltages, multiplier."""

    matrix: csc_matrix
    n_nodes: int
    K: int
    _factor: object = field(default=None, repr=False)

    def factor(self):
        if self._factor is None:
            self._factor = splu(self.matrix)
        return self._factor


@dataclass(frozen=True)
class ForwardOutput:
    """Electrode voltages, one row per driven current pattern."""

    voltages: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        """Pattern-major flattening into ``R^{patterns * K}``."""
        return self.voltages.ravel()


class ForwardSolver:
    """Caches the mesh geometry so conductivity samples assemble quickly.

    The stiffness sparsity pattern and per-triangle geometric factors, the
    conductivity-independent boundary block, and the grounding row are built
    once; :meth:`assemble` only scales and sums.
    """

    def __init__(self, mesh: Mesh, layout: ElectrodeLayout, zeta_max: float = 1.0):
        if mesh.edge_electrode is None:
            raise ValueError("mesh boundary edges are not classified against a layout")
        if zeta_max <= 0:
            raise ValueError("peak admittance must be positive")
        self.mesh = mesh
        self.layout = layout
        self.zeta_max = zeta_max
        self.n_nodes = len(mesh.nodes)
        self.K = layout.K
        self.n_total = self.n_nodes + self.K + 1
        self.n_solves = 0

        tri = mesh.triangles
        p = mesh.nodes[tri]
        # gradient coefficients of the barycentric functions
        b = p[:, [1, 2, 0], 1] - p[:, [2, 0, 1], 1]
        c = p[:, [2, 0, 1], 0] - p[:, [1, 2, 0], 0]
        area = 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        local = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
            4.0 * area[:, None, None]
        )
        self._stiff_rows = tri[:, [0, 0, 0, 1, 1, 1, 2, 2, 2]].ravel()
        self._stiff_cols = tri[:, [0, 1, 2, 0, 1, 2, 0, 1, 2]].ravel()
        self._stiff_geom = local.reshape(-1)
        self.centroids = p.mean(axis=1)
        self.n_elements = len(tri)

        rows, cols, data = self._boundary_block()
        self._fixed_rows = np.array(rows, dtype=int)
        self._fixed_cols = np.array(cols, dtype=int)
        self._fixed_data = np.array(data)
        self._all_rows = np.concatenate([self._stiff_rows, self._fixed_rows])
        self._all_cols = np.concatenate([self._stiff_cols, self._fixed_cols])

    def _boundary_block(self):
        """Electrode coupling terms and the grounding row, assembled once.

        On every electrode edge the integrand (admittance times products of
        linear traces) is cubic per panel; edges containing the electrode
        midpoint are split there so two-point Gauss stays exact.
        """
        mesh, n, K = self.mesh, self.n_nodes, self.K
        arcs_sorted = boundary_arc_intervals(mesh)
        rows, cols, data = [], [], []
        gauss = 1.0 / np.sqrt(3.0)
        for e, k in enumerate(mesh.edge_electrode):
            if k < 0:
                continue
            a, bnode = mesh.edge_nodes[e]
            _, start, end = self.layout.intervals[k]
            mid = 0.5 * (start + end)
            t0, t1 = arcs_sorted[e]
            ta, tb = self._node_arcs(e)
            panels = [(t0, mid), (mid, t1)] if t0 < mid < t1 else [(t0, t1)]
            m_aa = m_ab = m_bb = s_a = s_b = s_tot = 0.0
            for lo, hi in panels:
                half = 0.5 * (hi - lo)
                center = 0.5 * (hi + lo)
                for g in (center - half * gauss, center + half * gauss):
                    zeta = self.zeta_max * _hat(g, start, end)
                    phi_a = (tb - g) / (tb - ta)
                    phi_b = (g - ta) / (tb - ta)
                    w = half * zeta
                    m_aa += w * phi_a * phi_a
                    m_ab += w * phi_a * phi_b
                    m_bb += w * phi_b * phi_b
                    s_a += w * phi_a
                    s_b += w * phi_b
                    s_tot += w
            vk = n + k
            entries = [
                (a, a, m_aa),
                (a, bnode, m_ab),
                (bnode, a, m_ab),
                (bnode, bnode, m_bb),
                (a, vk, -s_a),
                (vk, a, -s_a),
                (bnode, vk, -s_b),
                (vk, bnode, -s_b),
                (vk, vk, s_tot),
            ]
            for r, cc, v in entries:
                rows.append(r)
                cols.append(cc)
                data.append(v)
        ground = n + K
        for k in range(K):
            rows.extend([ground, n + k])
            cols.extend([n + k, ground])
            data.extend([1.0, 1.0])
        return rows, cols, data

    def _node_arcs(self, e: int) -> tuple[float, float]:
        """Arc coordinates of the two nodes of boundary edge ``e``, in order."""
        side = self.mesh.edge_side[e]
        pts = self.mesh.nodes[self.mesh.edge_nodes[e]]
        if side == 0:
            vals = pts[:, 0]
        elif side == 1:
            vals = pts[:, 1]
        elif side == 2:
            vals = 1.0 - pts[:, 0]
        else:
            vals = 1.0 - pts[:, 1]
        return float(vals[0]), float(vals[1])

    def assemble(self, sigma_elements: np.ndarray) -> AssembledSystem:
        """Assemble the system for one piecewise-constant conductivity."""
        sigma_elements = np.asarray(sigma_elements, dtype=float)
        if sigma_elements.shape != (self.n_elements,):
            raise ValueError(
                f"need one conductivity per element ({self.n_elements}), "
                f"got shape {sigma_elements.shape}"
            )
        if not np.all(np.isfinite(sigma_elements)) or sigma_elements.min() <= 0:
            raise ValueError("conductivity must be positive and finite on every element")
        data = np.concatenate(
            [self._stiff_geom * np.repeat(sigma_elements, 9), self._fixed_data]
        )
        matrix = coo_matrix(
            (data, (self._all_rows, self._all_cols)),
            shape=(self.n_total, self.n_total),
        ).tocsc()
        return AssembledSystem(matrix, self.n_nodes, self.K)

    def solve(self, system: AssembledSystem, patterns: np.ndarray) -> ForwardOutput:
        """Solve all current patterns with one factorization."""
        out = solve_patterns(system, patterns)
        self.n_solves += 1
        return out

    def sigma_on_elements(self, model, y) -> np.ndarray:
        """Conductivity at element centroids for one coefficient vector."""
        return sigma_eval(model, y, self.centroids)


def assemble(
    mesh: Mesh,
    layout: ElectrodeLayout,
    sigma_per_element: np.ndarray,
    zeta_max: float = 1.0,
) -> AssembledSystem:
    """Assemble the electrode system for a piecewise-constant conductivity."""
    return ForwardSolver(mesh, layout, zeta_max).assemble(sigma_per_element)


def solve_patterns(system: AssembledSystem, patterns: np.ndarray) -> ForwardOutput:
    """Solve the assembled system for the given current patterns.

    One sparse factorization is shared by all patterns; each voltage row sums
    to zero through the grounding constraint.
    """
    patterns = np.atleast_2d(np.asarray(patterns, dtype=float))
    if patterns.shape[1] != system.K:
        raise ValueError(f"patterns must have {system.K} entries per row")
    if len(patterns) and np.max(np.abs(patterns.sum(axis=1))) > _PATTERN_TOL:
        raise ValueError("current patterns must sum to zero")
    n = system.n_nodes
    n_total = system.matrix.shape[0]
    rhs = np.zeros((n_total, len(patterns)))
    rhs[n : n + system.K] = patterns.T
    try:
        sol = system.factor().solve(rhs)
    except RuntimeError:
        sol = _iterative_solve(system.matrix, rhs)
    voltages = sol[n : n + system.K].T
    if not np.all(np.isfinite(voltages)):
        raise RuntimeError("forward solve produced non-finite voltages")
    return ForwardOutput(voltages=voltages)


def _iterative_solve(matrix, rhs):
    """Residual-checked fallback when the direct factorization fails."""
    sol = np.empty_like(rhs)
    for j in range(rhs.shape[1]):
        x, info = minres(matrix, rhs[:, j], rtol=_ITERATIVE_TOL)
        resid = np.linalg.norm(matrix @ x - rhs[:, j])
        if info != 0 or resid > _ITERATIVE_TOL * (1 + np.linalg.norm(rhs[:, j])):
            raise RuntimeError("forward system could not be solved")
        sol[:, j] = x
    return sol


def forward_map(
    y,
    model,
    mesh: Mesh,
    layout: ElectrodeLayout,
    patterns: np.ndarray | None = None,
    solver: ForwardSolver | None = None,
) -> np.ndarray:
    """Electrode voltages for one coefficient vector, flattened.

    Evaluates the conductivity at element centroids, assembles, solves the
    ``K - 1`` standard patterns (or the given ones), and concatenates the
    voltage rows pattern-major.
    """
    solver = solver if solver is not None else ForwardSolver(mesh, layout)
    if patterns is None:
        patterns = standard_patterns(layout.K)
    sigma = solver.sigma_on_elements(model, y)
    return solver.solve(solver.assemble(sigma), patterns).flat


class ParametricForward:
    """Fast path from coefficient vectors to voltages for a fixed model.

    Precomputes the basis matrix at element centroids so repeated samples
    cost one matrix-vector product plus assembly and factorization.
    """

    def __init__(self, solver: ForwardSolver, model, patterns: np.ndarray | None = None):
        self.solver = solver
        self.model = model
        self.patterns = (
            standard_patterns(solver.K) if patterns is None else np.asarray(patterns, float)
        )
        self._basis = model.basis_matrix(solver.centroids)

    @property
    def output_dim(self) -> int:
        return len(self.patterns) * self.solver.K

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.model.J,):
            raise ValueError(f"expected {self.model.J} coefficients, got shape {y.shape}")
        if np.any(np.abs(y) > 1.0 + 1e-12):
            raise ValueError("coefficient vector leaves the cube [-1, 1]^J")
        u = self._basis @ y
        sigma = np.exp(u) if self.model.is_log else self.model.baseline + u
        return self.solver.solve(self.solver.assemble(sigma), self.patterns).flat


def write_voltage_file(path, K: int, mesh_level: int, values, extra: dict | None = None):
    """Write electrode voltages as text.

    Header lines ``K``, ``patterns``, ``mesh_level`` (plus any extra keys) in
    ``key = value`` form, then the ``K (K - 1)`` values pattern-major, one
    per line, full decimal precision.
    """
    values = np.asarray(values, dtype=float).ravel()
    if len(values) != K * (K - 1):
        raise ValueError(f"expected {K * (K - 1)} values for K={K}, got {len(values)}")
    with open(path, "w") as fh:
        fh.write(f"K = {K}\n")
        fh.write(f"patterns = {K - 1}\n")
        fh.write(f"mesh_level = {mesh_level}\n")
        for key, val in (extra or {}).items():
            fh.write(f"{key} = {val}\n")
        for v in values:
            fh.write(f"{v:.17g}\n")


def read_voltage_file(path) -> tuple[dict, np.ndarray]:
    """Parse a voltage file; returns the header dict and the value vector."""
    header: dict[str, str] = {}
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
                header[key.strip()] = val.strip()
            else:
                values.append(float(line))
    for key in ("K", "patterns", "mesh_level"):
        if key not in header:
            raise ValueError(f"voltage file is missing header key {key!r}")
    K = int(header["K"])
    expected = K * int(header["patterns"])
    if len(values) != expected:
        raise ValueError(f"voltage file has {len(values)} values, expected {expected}")
    return header, np.array(values)
