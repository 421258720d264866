"""Parametrized conductivity fields on the unit square.

Two families map a coefficient vector ``y`` in the cube [-1, 1]^J to a
conductivity field:

* :class:`WaveletModel`: an affine expansion ``baseline + sum_j y_j psi_j``
  over a truncated two-dimensional Haar system, piecewise constant on dyadic
  cells.  Coefficient magnitudes shrink geometrically with the wavelet level,
  which keeps the field uniformly inside a positive range.
* :class:`TrigModel`: a log-transformed cosine expansion
  ``exp(sum_j y_j psi_j)`` with algebraically decaying coefficients.

Both expose a common interface: ``J`` (parameter count), ``coefficient(j)``
returning the j-th basis function with its sup norm, and ``basis_matrix``
for vectorized evaluation.  Fields are rendered onto square pixel grids for
reporting and posterior-mean comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WaveletModel",
    "TrigModel",
    "Coefficient",
    "PixelGrid",
    "wavelet_index",
    "wavelet_unindex",
    "trig_index",
    "sigma_eval",
    "sample_prior",
    "render_pixels",
    "bilinear_upsample",
    "write_pixels",
    "read_pixels",
]


def wavelet_index(l: int, k: tuple[int, int], i: int) -> int:
    """Flatten a Haar-wavelet label (level, cell, orientation) to ``j >= 1``.

    The index is ``4^l + 3 (2^l k1 + k2) + i - 1``, which enumerates the
    three orientations cell by cell and level by level: level ``l`` occupies
    the contiguous block ``4^l .. 4^(l+1) - 1``.
    """
    k1, k2 = k
    if l < 0 or i not in (1, 2, 3):
        raise ValueError(f"invalid wavelet label l={l}, i={i}")
    if not (0 <= k1 < 2**l and 0 <= k2 < 2**l):
        raise ValueError(f"cell {k} out of range at level {l}")
    return 4**l + 3 * (2**l * k1 + k2) + i - 1


def wavelet_unindex(j: int) -> tuple[int, tuple[int, int], int]:
    """Invert :func:`wavelet_index`."""
    if j < 1:
        raise ValueError(f"wavelet index must be >= 1, got {j}")
    l = 0
    while 4 ** (l + 1) <= j:
        l += 1
    rem = j - 4**l
    cell, i = divmod(rem, 3)
    k1, k2 = divmod(cell, 2**l)
    return l, (k1, k2), i + 1


def trig_index(j1: int, j2: int) -> int:
    """Flatten a frequency pair to ``j >= 1`` by the Cantor diagonal order."""
    if j1 < 0 or j2 < 0:
        raise ValueError(f"frequencies must be nonnegative, got ({j1}, {j2})")
    s = j1 + j2
    return s * (s + 1) // 2 + j2 + 1


@dataclass(frozen=True)
class Coefficient:
    """A basis function together with its sup norm."""

    fn: callable
    norm: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.fn(points)


def _haar_signs(t: np.ndarray) -> np.ndarray:
    """Sign pattern of the Haar mother wavelet on [0, 1), zero elsewhere."""
    return np.where(t < 0.5, 1.0, np.where(t < 1.0, -1.0, 0.0))


@dataclass(frozen=True)
class WaveletModel:
    """Affine Haar-wavelet conductivity model.

    Parameters
    ----------
    decay : float
        Geometric decay rate of the coefficient magnitudes across levels.
    levels : int
        Finest wavelet level retained; the parameter count is
        ``4**(levels + 1) - 1``.
    baseline : float
        Constant background conductivity.
    """

    decay: float = 3.0
    levels: int = 1
    baseline: float = 1.1

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("decay rate must be positive")
        if self.levels < 0:
            raise ValueError("levels must be nonnegative")
        if self.sigma_bounds()[0] <= 0:
            raise ValueError("baseline too small: the field can reach zero")

    kind = "affine_wavelet"
    is_log = False

    @property
    def J(self) -> int:
        return 4 ** (self.levels + 1) - 1

    @property
    def amplitude(self) -> float:
        # ties the per-level magnitude to the decay rate so the summed
        # oscillation never exceeds 3 * 0.3 regardless of truncation
        return 0.3 * (1.0 - 2.0**-self.decay)

    def sigma_bounds(self) -> tuple[float, float]:
        """Hard bounds of the field over all y in the cube."""
        per_level = 2.0 ** (-self.decay * np.arange(self.levels + 1))
        osc = 3.0 * self.amplitude * per_level.sum()
        return self.baseline - osc, self.baseline + osc

    def coefficient(self, j: int) -> Coefficient:
        """The j-th basis function, scaled, with its sup norm."""
        if not 1 <= j <= self.J:
            raise ValueError(f"index {j} outside 1..{self.J}")
        l, (k1, k2), i = wavelet_unindex(j)
        scale = self.amplitude * 2.0 ** (-self.decay * l)

        def fn(points, l=l, k1=k1, k2=k2, i=i, scale=scale):
            points = np.atleast_2d(points)
            t1 = 2.0**l * points[:, 0] - k1
            t2 = 2.0**l * points[:, 1] - k2
            f1 = _haar_signs(t1) if i in (2, 3) else ((t1 >= 0) & (t1 <= 1)).astype(float)
            f2 = _haar_signs(t2) if i in (1, 3) else ((t2 >= 0) & (t2 <= 1)).astype(float)
            return scale * f1 * f2

        return Coefficient(fn, scale)

    def basis_matrix(self, points: np.ndarray) -> np.ndarray:
        """Evaluate all J basis functions at once.

        Parameters
        ----------
        points : ndarray, shape (n, 2)

        Returns
        -------
        ndarray, shape (n, J)
        """
        points = np.atleast_2d(points)
        n = len(points)
        B = np.zeros((n, self.J))
        rows = np.arange(n)
        for l in range(self.levels + 1):
            m = 2**l
            kx = np.clip(np.floor(m * points[:, 0]).astype(int), 0, m - 1)
            ky = np.clip(np.floor(m * points[:, 1]).astype(int), 0, m - 1)
            sx = _haar_signs(m * points[:, 0] - kx)
            sy = _haar_signs(m * points[:, 1] - ky)
            scale = self.amplitude * 2.0 ** (-self.decay * l)
            # column of orientation i is wavelet_index(l, k, i) - 1
            base = 4**l + 3 * (m * kx + ky) - 1
            B[rows, base] = scale * sy
            B[rows, base + 1] = scale * sx
            B[rows, base + 2] = scale * sx * sy
        return B


@dataclass(frozen=True)
class TrigModel:
    """Log-transformed cosine conductivity model.

    The log-field is ``sum_j y_j c_j cos(pi j1 x1) cos(pi j2 x2)`` over the
    frequency block ``0 <= j1, j2 <= max_freq``, ordered by the Cantor
    diagonal index, with magnitudes
    ``c_j = scale * amplitude / (offset^2 + length_scale^2 pi^2 |j|^2)^smoothness``.

    With the default constants the constant mode's magnitude is of order
    1.7e4, so ``exp`` overflows for generic coefficient vectors; numerically
    usable fields need ``scale`` of order 1e-5 or smaller.
    """

    amplitude: float = 0.1
    offset: float = 0.3
    length_scale: float = 10.0**-1.5
    smoothness: float = 5.0
    max_freq: int = 7
    scale: float = 1.0
    modes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_freq < 0:
            raise ValueError("max_freq must be nonnegative")
        if self.amplitude <= 0 or self.offset <= 0:
            raise ValueError("amplitude and offset must be positive")
        pairs = [
            (j1, j2)
            for j1 in range(self.max_freq + 1)
            for j2 in range(self.max_freq + 1)
        ]
        pairs.sort(key=lambda p: trig_index(*p))
        object.__setattr__(self, "modes", np.array(pairs, dtype=int))

    kind = "log_trig"
    is_log = True

    @property
    def J(self) -> int:
        return (self.max_freq + 1) ** 2

    def _magnitudes(self) -> np.ndarray:
        freq2 = np.sum(self.modes.astype(float) ** 2, axis=1)
        denom = (self.offset**2 + self.length_scale**2 * np.pi**2 * freq2) ** self.smoothness
        return self.scale * self.amplitude / denom

    def coefficient(self, j: int) -> Coefficient:
        """The j-th basis function of the log-field, with its sup norm."""
        if not 1 <= j <= self.J:
            raise ValueError(f"index {j} outside 1..{self.J}")
        j1, j2 = self.modes[j - 1]
        mag = self._magnitudes()[j - 1]

        def fn(points, j1=j1, j2=j2, mag=mag):
            points = np.atleast_2d(points)
            return mag * np.cos(np.pi * j1 * points[:, 0]) * np.cos(np.pi * j2 * points[:, 1])

        return Coefficient(fn, float(mag))

    def basis_matrix(self, points: np.ndarray) -> np.ndarray:
        """Evaluate all J log-field basis functions at once."""
        points = np.atleast_2d(points)
        c1 = np.cos(np.pi * np.outer(points[:, 0], self.modes[:, 0]))
        c2 = np.cos(np.pi * np.outer(points[:, 1], self.modes[:, 1]))
        return c1 * c2 * self._magnitudes()


def _check_vector(model, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (model.J,):
        raise ValueError(f"coefficient vector has shape {y.shape}, expected ({model.J},)")
    if np.any(np.abs(y) > 1.0 + 1e-12):
        raise ValueError("coefficient vector leaves the cube [-1, 1]^J")
    return y


def sigma_eval(model, y, points: np.ndarray) -> np.ndarray:
    """Evaluate the conductivity field at the given points.

    Parameters
    ----------
    model : WaveletModel or TrigModel
    y : ndarray, shape (J,)
        Coefficient vector in [-1, 1]^J.
    points : ndarray, shape (n, 2)

    Returns
    -------
    ndarray, shape (n,)
    """
    y = _check_vector(model, y)
    u = model.basis_matrix(points) @ y
    if model.is_log:
        return np.exp(u)
    return model.baseline + u


def sample_prior(rng: np.random.Generator, J: int) -> np.ndarray:
    """Draw one coefficient vector uniformly from the cube [-1, 1]^J."""
    return rng.uniform(-1.0, 1.0, J)


@dataclass(frozen=True)
class PixelGrid:
    """Field values at the cell centers of a regular pixel grid.

    Row ``r``, column ``c`` holds the value at
    ``((c + 0.5) / cols, (r + 0.5) / rows)``: rows run bottom-up along the
    second coordinate.
    """

    values: np.ndarray

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def pixel_centers(rows: int, cols: int) -> np.ndarray:
    """Cell-center coordinates of a grid, ordered row-major."""
    x = (np.arange(cols) + 0.5) / cols
    y = (np.arange(rows) + 0.5) / rows
    xx, yy = np.meshgrid(x, y)
    return np.column_stack([xx.ravel(), yy.ravel()])


def render_pixels(model, y, resolution: int) -> PixelGrid:
    """Render the conductivity field on a square pixel grid."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    vals = sigma_eval(model, y, pixel_centers(resolution, resolution))
    return PixelGrid(values=vals.reshape(resolution, resolution))


def bilinear_upsample(grid: PixelGrid, factor: int) -> PixelGrid:
    """Smooth a pixel grid onto a ``factor`` times finer grid for display.

    Values are interpolated bilinearly between coarse cell centers and
    clamped at the border.  Intended for presentation only; quantitative
    comparisons operate on the raw grids.
    """
    if factor < 1:
        raise ValueError("factor must be a positive integer")
    rows, cols = grid.rows * factor, grid.cols * factor

    def axis_weights(n_fine, n_coarse, scale):
        u = (np.arange(n_fine) + 0.5) / scale - 0.5
        u = np.clip(u, 0.0, n_coarse - 1.0)
        i0 = np.minimum(u.astype(int), n_coarse - 2) if n_coarse > 1 else np.zeros(n_fine, int)
        w = u - i0
        return i0, w

    r0, wr = axis_weights(rows, grid.rows, factor)
    c0, wc = axis_weights(cols, grid.cols, factor)
    v = grid.values
    if grid.rows == 1:
        rows_interp = np.repeat(v, 1, axis=0)[np.zeros(rows, int)]
    else:
        rows_interp = v[r0] * (1 - wr)[:, None] + v[r0 + 1] * wr[:, None]
    if grid.cols == 1:
        out = rows_interp[:, np.zeros(cols, int)]
    else:
        out = rows_interp[:, c0] * (1 - wc) + rows_interp[:, c0 + 1] * wc
    return PixelGrid(values=out)


def write_pixels(grid: PixelGrid, path) -> None:
    """Write a pixel grid as text: header ``rows cols`` then row-major values."""
    with open(path, "w") as fh:
        fh.write(f"{grid.rows} {grid.cols}\n")
        for row in grid.values:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_pixels(path) -> PixelGrid:
    """Parse a pixel grid written by :func:`write_pixels`."""
    with open(path) as fh:
        rows, cols = (int(p) for p in fh.readline().split())
        values = np.loadtxt(fh, ndmin=2)
    if values.shape != (rows, cols):
        raise ValueError(f"grid body {values.shape} does not match header ({rows}, {cols})")
    return PixelGrid(values=values)
