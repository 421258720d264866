"""Structured triangulations of the unit square and boundary electrode layouts.

The computational domain is the unit square (0,1)^2.  Meshes are uniform
right-triangle meshes: at level ``l`` the square is divided into a lattice of
``2^l x 2^l`` cells of side ``2^-l`` and every cell is split along its
lower-left to upper-right diagonal.  Electrodes sit on the boundary, covering
half of the perimeter, and are described by arc intervals on the four sides.

Sides are numbered counterclockwise starting from the bottom: 0 = bottom,
1 = right, 2 = top, 3 = left.  Each side carries its own arc coordinate
``t in [0, 1]`` increasing in the counterclockwise direction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "Mesh",
    "ElectrodeLayout",
    "build_unit_square_mesh",
    "electrode_layout",
    "classify_boundary_edges",
    "boundary_arc_intervals",
    "write_mesh",
    "read_mesh",
]

_ALIGN_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    """Uniform triangulation of the unit square.

    Attributes
    ----------
    level : int
        Refinement level; the mesh spacing is ``2**-level``.
    nodes : ndarray, shape (n_nodes, 2)
        Vertex coordinates, lattice row-major (x fastest).
    triangles : ndarray, shape (n_tri, 3)
        Vertex indices of each triangle, counterclockwise.
    edge_nodes : ndarray, shape (n_edges, 2)
        Node pairs of the boundary edges.
    edge_side : ndarray, shape (n_edges,)
        Side id (0..3) of each boundary edge.
    edge_electrode : ndarray or None
        Electrode id per boundary edge, -1 off-electrode.  ``None`` until
        :func:`classify_boundary_edges` has been applied.
    """

    level: int
    nodes: np.ndarray
    triangles: np.ndarray
    edge_nodes: np.ndarray
    edge_side: np.ndarray
    edge_electrode: np.ndarray | None = None


@dataclass(frozen=True)
class ElectrodeLayout:
    """Arc intervals of ``K`` boundary electrodes.

    Electrodes are numbered counterclockwise starting on the bottom side.
    ``intervals`` has one row ``(side, start, end)`` per electrode, where
    ``start < end`` are arc coordinates on that side.  Every electrode has
    arc length ``2/K``; together they cover half of the perimeter.
    """

    K: int
    intervals: np.ndarray

    @property
    def electrode_length(self) -> float:
        return 2.0 / self.K

    def midpoint(self, k: int) -> tuple[int, float]:
        """Side id and arc coordinate of the midpoint of electrode ``k``."""
        side, start, end = self.intervals[k]
        return int(side), 0.5 * (start + end)


def build_unit_square_mesh(level: int) -> Mesh:
    """Build the level-``level`` uniform triangulation of the unit square.

    Parameters
    ----------
    level : int
        Nonnegative refinement level; spacing is ``2**-level``, giving
        ``(2**level + 1)**2`` nodes and ``2 * 4**level`` triangles.

    Returns
    -------
    Mesh
        Mesh with boundary edges enumerated but not yet classified.
    """
    if not isinstance(level, (int, np.integer)) or level < 0:
        raise ValueError(f"mesh level must be a nonnegative integer, got {level!r}")
    n = 2**level
    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    def idx(ix, iy):
        return iy * (n + 1) + ix

    ix, iy = np.meshgrid(np.arange(n), np.arange(n))
    ix, iy = ix.ravel(), iy.ravel()
    ll = idx(ix, iy)
    lr = idx(ix + 1, iy)
    ul = idx(ix, iy + 1)
    ur = idx(ix + 1, iy + 1)
    # split each cell along the lower-left to upper-right diagonal
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.vstack([lower, upper])

    i = np.arange(n)
    bottom = np.column_stack([idx(i, 0), idx(i + 1, 0)])
    right = np.column_stack([idx(n, i), idx(n, i + 1)])
    top = np.column_stack([idx(n - i, n), idx(n - i - 1, n)])
    left = np.column_stack([idx(0, n - i), idx(0, n - i - 1)])
    edge_nodes = np.vstack([bottom, right, top, left])
    edge_side = np.repeat(np.arange(4), n)

    return Mesh(level, nodes, triangles, edge_nodes, edge_side)


def electrode_layout(K: int) -> ElectrodeLayout:
    """Place ``K`` electrodes of arc length ``2/K`` on the boundary.

    Each side carries ``K/4`` electrodes separated by gaps of length ``2/K``
    with margins of ``1/K`` at the corners, so electrodes never touch a
    corner and the layout is invariant under 90-degree rotations.

    Parameters
    ----------
    K : int
        Number of electrodes; must be a positive multiple of 4.
    """
    if K <= 0 or K % 4 != 0:
        raise ValueError(f"electrode count must be a positive multiple of 4, got {K}")
    per_side = K // 4
    e = 2.0 / K
    rows = []
    for side in range(4):
        for i in range(per_side):
            start = e * (0.5 + 2 * i)
            rows.append((side, start, start + e))
    return ElectrodeLayout(K, np.array(rows))


def boundary_arc_intervals(mesh: Mesh) -> np.ndarray:
    """Arc interval ``(t0, t1)`` of every boundary edge on its own side.

    Returns
    -------
    ndarray, shape (n_edges, 2)
        Sorted arc coordinates of each edge's endpoints in the side's
        counterclockwise parametrization.
    """
    pts = mesh.nodes[mesh.edge_nodes]
    t = np.empty((len(mesh.edge_nodes), 2))
    for side, expr in (
        (0, pts[:, :, 0]),
        (1, pts[:, :, 1]),
        (2, 1.0 - pts[:, :, 0]),
        (3, 1.0 - pts[:, :, 1]),
    ):
        sel = mesh.edge_side == side
        t[sel] = expr[sel]
    return np.sort(t, axis=1)


def classify_boundary_edges(mesh: Mesh, layout: ElectrodeLayout) -> Mesh:
    """Tag each boundary edge with the electrode containing it, or -1.

    Every boundary edge must lie entirely inside a single electrode or
    entirely in a gap; an electrode endpoint falling strictly inside an
    edge means the mesh is too coarse for the layout.

    Raises
    ------
    ValueError
        If an electrode endpoint is not aligned with the mesh nodes.
    """
    arcs = boundary_arc_intervals(mesh)
    tags = np.full(len(mesh.edge_nodes), -1, dtype=int)
    for k, (side, start, end) in enumerate(layout.intervals):
        on_side = mesh.edge_side == int(side)
        t0, t1 = arcs[:, 0], arcs[:, 1]
        overlap = np.minimum(t1, end) - np.maximum(t0, start)
        length = t1 - t0
        partial = on_side & (overlap > _ALIGN_TOL) & (overlap < length - _ALIGN_TOL)
        if np.any(partial):
            raise ValueError(
                f"electrode {k} endpoint falls inside a boundary edge; "
                f"mesh level {mesh.level} is too coarse for K={layout.K}"
            )
        inside = on_side & (overlap >= length - _ALIGN_TOL)
        if np.any(tags[inside] != -1):
            raise ValueError(f"electrode {k} overlaps a previously tagged edge")
        tags[inside] = k
    return replace(mesh, edge_electrode=tags)


def write_mesh(mesh: Mesh, path) -> None:
    """Dump a mesh as text: node, triangle, and boundary-edge records.

    One node per line ``x y``, then one triangle per line ``i j k``, then
    one boundary edge per line ``i j side electrode`` (``none`` untagged).
    Record kinds are distinguished by field count when parsing.
    """
    with open(path, "w") as fh:
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for e, (i, j) in enumerate(mesh.edge_nodes):
            tag = "none" if mesh.edge_electrode is None else mesh.edge_electrode[e]
            fh.write(f"{i} {j} {mesh.edge_side[e]} {tag}\n")


def read_mesh(path) -> Mesh:
    """Parse a mesh dump written by :func:`write_mesh`."""
    nodes, tris, edges, sides, tags = [], [], [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) == 2:
                nodes.append((float(parts[0]), float(parts[1])))
            elif len(parts) == 3:
                tris.append(tuple(int(p) for p in parts))
            elif len(parts) == 4:
                edges.append((int(parts[0]), int(parts[1])))
                sides.append(int(parts[2]))
                tags.append(-1 if parts[3] == "none" else int(parts[3]))
            else:
                raise ValueError(f"unrecognized mesh record: {line!r}")
    n_nodes = len(nodes)
    level = int(round(np.log2(np.sqrt(n_nodes) - 1)))
    if (2**level + 1) ** 2 != n_nodes:
        raise ValueError(f"node count {n_nodes} is not a square lattice")
    tag_arr = np.array(tags, dtype=int)
    return Mesh(
        level=level,
        nodes=np.array(nodes),
        triangles=np.array(tris, dtype=int),
        edge_nodes=np.array(edges, dtype=int),
        edge_side=np.array(sides, dtype=int),
        edge_electrode=None if np.all(tag_arr == -1) else tag_arr,
    )
