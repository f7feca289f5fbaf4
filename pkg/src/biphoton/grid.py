"""Brute-force numerical checks on sampled single-axis biphoton amplitudes.

A :class:`GridField` holds one transverse-axis factor sampled on a square
grid, rows indexed by the signal coordinate and columns by the idler
coordinate.  The full 2D state is the product of two such factors, so
every quantity here is per axis and is squared where the closed form is
2D (the Schmidt number, for instance).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    GridSpec,
    OpticalConfig,
    coord_coeffs,
    coordinate_axis,
    momentum_axis,
    momentum_coeffs,
)

# the narrow conditional width must cover at least this many cells
MIN_CELLS_PER_SIGMA = 1.0
MIN_WINDOW_SIGMAS = 5.0
ALIASING_BAND = 0.05  # fraction of the grid on each edge
ALIASING_TOLERANCE = 1e-6


class GridError(ValueError):
    pass


@dataclass
class GridField:
    """Sampled single-axis amplitude.

    ``values[i, j]`` is the amplitude at (signal ``coords_s[i]``, idler
    ``coords_i[j]``) in physical units; ``matrix`` folds in the quadrature
    weight so that ``sum |matrix|^2`` is the norm.
    """

    values: np.ndarray
    spacing_s: float
    spacing_i: float
    space: str = "coordinate"
    offset_s: float = 0.0
    offset_i: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise GridError("GridField values must be a square 2D array")
        self.values = v.astype(complex, copy=False)

    @property
    def points(self) -> int:
        return self.values.shape[0]

    @property
    def weight(self) -> float:
        return self.spacing_s * self.spacing_i

    @property
    def coords_s(self) -> np.ndarray:
        return self.offset_s + (np.arange(self.points) - self.points / 2 + 0.5) * self.spacing_s

    @property
    def coords_i(self) -> np.ndarray:
        return self.offset_i + (np.arange(self.points) - self.points / 2 + 0.5) * self.spacing_i

    @property
    def matrix(self) -> np.ndarray:
        return self.values * math.sqrt(self.weight)

    def scaled(self, factor: complex) -> "GridField":
        return GridField(self.values * factor, self.spacing_s, self.spacing_i,
                         self.space, self.offset_s, self.offset_i)


# -- grid sizing -----------------------------------------------------------------

def marginal_std(config: OpticalConfig, z: float, space: str) -> float:
    """Standard deviation of the signal marginal along one axis."""
    if space == "momentum":
        m = momentum_coeffs(config, z)
        return math.sqrt((1.0 / m.A.real + 1.0 / m.B.real) / 4.0)
    c = coord_coeffs(config, z)
    return math.sqrt((c.gamma / c.re_a + c.beta / c.re_b) / 4.0)


def conditional_std(config: OpticalConfig, z: float, space: str) -> float:
    """Standard deviation of the signal given a fixed idler; the narrowest feature."""
    if space == "momentum":
        m = momentum_coeffs(config, z)
        return 1.0 / math.sqrt(m.A.real + m.B.real)
    c = coord_coeffs(config, z)
    return 1.0 / math.sqrt(c.re_a / c.gamma + c.re_b / c.beta)


def default_grid(config: OpticalConfig, z: float, space: str, points: int = 512,
                 halfwidth_factor: float = 6.0, min_cells: float | None = None) -> GridSpec:
    """Grid spanning ``halfwidth_factor`` marginal standard deviations.

    With ``min_cells`` set, ``points`` is doubled until the conditional
    width covers that many cells.
    """
    half = halfwidth_factor * marginal_std(config, z, space)
    if min_cells is not None:
        narrow = conditional_std(config, z, space)
        while narrow < min_cells * 2.0 * half / points:
            points *= 2
    return GridSpec(points=points, half_width=half)


def _check_window(config, z, grid: GridSpec, space: str):
    if grid.half_width < MIN_WINDOW_SIGMAS * marginal_std(config, z, space):
        raise GridError(f"grid window narrower than {MIN_WINDOW_SIGMAS:g} marginal standard deviations")
    if conditional_std(config, z, space) < MIN_CELLS_PER_SIGMA * grid.spacing:
        raise GridError("grid too coarse: narrow Gaussian width spans less than one cell")


def sample_momentum_grid(config: OpticalConfig, z: float, grid: GridSpec) -> GridField:
    _check_window(config, z, grid, "momentum")
    m = momentum_coeffs(config, z)
    p = grid.coords()
    values = momentum_axis(m, p[:, None], p[None, :])
    return GridField(values, grid.spacing, grid.spacing, space="momentum")


def sample_coordinate_grid(config: OpticalConfig, z: float, grid: GridSpec) -> GridField:
    _check_window(config, z, grid, "coordinate")
    c = coord_coeffs(config, z)
    x = grid.coords()
    values = coordinate_axis(c, x[:, None], x[None, :])
    return GridField(values, grid.spacing, grid.spacing, space="coordinate")


def normalization_check(field: GridField) -> float:
    return abs(float(np.sum(np.abs(field.values) ** 2)) * field.weight - 1.0)


def _require_normalized(field: GridField, tol: float = 1e-3):
    dev = normalization_check(field)
    if dev > tol:
        raise GridError(f"field is not normalized (deviation {dev:.3g})")


# -- Schmidt decomposition ---------------------------------------------------------

def numeric_schmidt(field: GridField) -> tuple[np.ndarray, float]:
    """Schmidt weights from the singular values of the weighted sample matrix.

    Returns the per-axis weights ``sigma_n^2`` and the 2D Schmidt number
    ``(1 / sum sigma_n^4)^2``.
    """
    _require_normalized(field)
    sv = np.linalg.svd(field.matrix, compute_uv=False)
    lam = sv ** 2
    k1d = 1.0 / math.fsum(lam ** 2)
    return lam, k1d ** 2


# -- momentum -> coordinate transform ---------------------------------------------------

def _centered_dft(values: np.ndarray, axis: int) -> np.ndarray:
    # Sum_j f(p_j) exp(i p_j x_k) / sqrt(n) with p_j = (j - c) dp, x_k = (k - c) dx,
    # c = n/2 - 1/2 and dp dx = 2 pi / n.
    n = values.shape[axis]
    c = n / 2 - 0.5
    j = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    pre = np.exp(-2j * np.pi * c * j / n).reshape(shape)
    post = np.exp(2j * np.pi * (c * c - c * j) / n).reshape(shape)
    return np.fft.ifft(values * pre, axis=axis, norm="ortho") * post


def transform_to_coordinate(field: GridField, check_aliasing: bool = True) -> GridField:
    """Continuous-convention Fourier transform ``(1/2pi) iint Phi e^{i(p xs + q xi)}``.

    The result lives on the reciprocal centered grid ``dx = 2 pi / (n dp)``.
    """
    if field.space != "momentum":
        raise GridError("transform_to_coordinate expects a momentum-space field")
    n = field.points
    mat = _centered_dft(_centered_dft(field.matrix, 0), 1)
    dx_s = 2.0 * math.pi / (n * field.spacing_s)
    dx_i = 2.0 * math.pi / (n * field.spacing_i)
    out = GridField(mat / math.sqrt(dx_s * dx_i), dx_s, dx_i, space="coordinate")
    if check_aliasing:
        frac = edge_fraction(out)
        if frac > ALIASING_TOLERANCE:
            raise GridError(f"aliasing risk: {frac:.3g} of the norm sits in the outer band")
    return out


def edge_fraction(field: GridField, band: float = ALIASING_BAND) -> float:
    """Share of the norm within ``band * points`` cells of any edge."""
    n = field.points
    m = max(1, int(round(band * n)))
    p = np.abs(field.matrix) ** 2
    total = p.sum()
    inner = p[m:n - m, m:n - m].sum()
    return float((total - inner) / total)


# -- moments -------------------------------------------------------------------------

def _variance(x: np.ndarray, weights: np.ndarray) -> float:
    w = weights / weights.sum()
    mean = np.dot(w, x)
    return float(np.dot(w, (x - mean) ** 2))


def numeric_moments(field: GridField) -> tuple[float, float, float]:
    """Marginal and conditional signal variances and their ratio (the Fedorov ratio).

    The conditional distribution is the column nearest idler coordinate 0;
    for a Gaussian state its variance does not depend on where the idler
    is pinned.
    """
    _require_normalized(field)
    density = np.abs(field.values) ** 2
    xs = field.coords_s
    marginal = _variance(xs, density.sum(axis=1))
    j0 = int(np.argmin(np.abs(field.coords_i)))
    row = density[:, j0]
    if np.count_nonzero(row > 1e-6 * row.max()) < 16:
        raise GridError("conditional slice underresolved")
    conditional = _variance(xs, row)
    return marginal, conditional, marginal / conditional


def principal_axes(field: GridField) -> tuple[float, float]:
    """Moment fit of |amplitude|^2: (major/minor std ratio, major-axis angle in radians).

    The angle is measured from the signal axis; +pi/4 is the x_s = x_i
    diagonal and -pi/4 the x_s = -x_i diagonal.
    """
    density = np.abs(field.values) ** 2
    w = density / density.sum()
    xs = field.coords_s[:, None]
    xi = field.coords_i[None, :]
    ms, mi = np.sum(w * xs), np.sum(w * xi)
    cov = np.array([
        [np.sum(w * (xs - ms) ** 2), np.sum(w * (xs - ms) * (xi - mi))],
        [np.sum(w * (xs - ms) * (xi - mi)), np.sum(w * (xi - mi) ** 2)],
    ])
    evals, evecs = np.linalg.eigh(cov)
    major = evecs[:, 1]
    angle = math.atan2(major[1], major[0])
    if angle > math.pi / 2:
        angle -= math.pi
    elif angle <= -math.pi / 2:
        angle += math.pi
    return math.sqrt(evals[1] / evals[0]), angle


def transform_phase(config: OpticalConfig, z: float) -> complex:
    """Constant per-axis phase of the exact transform relative to ``coordinate_axis``.

    The Fourier integral carries ``1/sqrt(A B)``; the closed form keeps only
    its modulus.
    """
    m = momentum_coeffs(config, z)
    return complex(np.exp(-0.5j * (np.angle(m.A) + np.angle(m.B))))
