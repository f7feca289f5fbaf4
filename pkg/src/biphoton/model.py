"""Gaussian biphoton model of the transverse SPDC state behind a thin crystal.

The pair amplitude in transverse wavenumber space is

    Phi(p, q; z) = N exp(-[A |p+q|^2 + B |p-q|^2] / 4)

with ``A = w0^2/(1 + w0^4/sigma0^2) + i mu1(z)`` and
``B = alpha L / kp + i mu2(z)``.  Its Fourier transform is the
coordinate-space amplitude

    Psi(xs, xi; z) = N' exp(-|xs-xi|^2 / (4B) - |xs+xi|^2 / (4A))

which is written below through ``beta = |B|^2`` and ``gamma = |A|^2``.
Everything is strict SI.  Constant phase factors are dropped, so both
amplitudes are real and positive at the origin.

The model is isotropic: every 2D amplitude is the product of identical
x and y factors.  The ``*_axis`` functions return one such factor.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from importlib import resources

import numpy as np

#: sinc(b x^2) ~ exp(-alpha b x^2); the two agree at the 1/e^2 intensity point.
SINC_GAUSSIAN_ALPHA = 0.455


@dataclass(frozen=True)
class OpticalConfig:
    """Crystal, pump and approximation parameters (SI units).

    The pump curvature is stored as ``1/R`` so that a collimated pump is
    exactly ``0.0``.
    """

    crystal_length: float
    pump_waist: float
    pump_wavelength: float
    pump_refractive_index: float
    pump_inverse_curvature: float = 0.0
    alpha: float = SINC_GAUSSIAN_ALPHA

    def __post_init__(self):
        checks = [
            (self.crystal_length > 0, "crystal_length must be > 0"),
            (self.pump_waist > 0, "pump_waist must be > 0"),
            (self.pump_wavelength > 0, "pump_wavelength must be > 0"),
            (self.pump_refractive_index >= 1, "pump_refractive_index must be >= 1"),
            (self.alpha > 0, "alpha must be > 0"),
            (math.isfinite(self.pump_inverse_curvature),
             "pump_inverse_curvature must be finite"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def wavenumber(self) -> float:
        return pump_wavenumber(self)

    @property
    def sigma0(self) -> float:
        """``-2R/kp``; infinite for a collimated pump."""
        if self.pump_inverse_curvature == 0:
            return math.inf
        return -2.0 / (self.wavenumber * self.pump_inverse_curvature)

    def with_changes(self, **kwargs) -> "OpticalConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class MomentumCoeffs:
    A: complex
    B: complex
    z: float


@dataclass(frozen=True)
class CoordCoeffs:
    """Coefficients of the coordinate-space amplitude at distance ``z``.

    ``norm`` is the full 2D normalization, i.e. the square of the per-axis
    factor ``(re_a re_b / (pi^2 gamma beta))^(1/4)``.
    """

    beta: float
    gamma: float
    mu1: float
    mu2: float
    norm: float
    re_a: float
    re_b: float
    z: float

    @property
    def axis_norm(self) -> float:
        return math.sqrt(self.norm)


@dataclass(frozen=True)
class GridSpec:
    """Centered 1D sampling grid: ``points`` cells across ``[-half_width, half_width]``.

    Sample positions sit at cell centers, so the grid is symmetric about 0
    and never contains the origin itself.
    """

    points: int
    half_width: float

    def __post_init__(self):
        if self.points < 16 or self.points % 2:
            raise ValueError("grid points must be even and >= 16")
        if not self.half_width > 0:
            raise ValueError("grid half_width must be > 0")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    def coords(self) -> np.ndarray:
        return (np.arange(self.points) - self.points / 2 + 0.5) * self.spacing


def pump_wavenumber(config: OpticalConfig) -> float:
    """Pump wavenumber inside the crystal, ``2 pi n_p / lambda_p``."""
    return 2.0 * math.pi * config.pump_refractive_index / config.pump_wavelength


def _curvature_terms(config: OpticalConfig) -> tuple[float, float]:
    # With t = w0^2 kp / (2R):
    #   w0^2 / (1 + w0^4/sigma0^2)     = w0^2 / (1 + t^2)
    #   sigma0 / (1 + sigma0^2/w0^4)   = -w0^2 t / (1 + t^2)
    # both finite at 1/R = 0.
    w2 = config.pump_waist ** 2
    t = w2 * pump_wavenumber(config) * config.pump_inverse_curvature / 2.0
    return w2 / (1.0 + t * t), -w2 * t / (1.0 + t * t)


def _check_z(z: float):
    if not z >= 0:
        raise ValueError(f"propagation distance must be >= 0, got {z!r}")


def momentum_coeffs(config: OpticalConfig, z: float) -> MomentumCoeffs:
    _check_z(z)
    k = pump_wavenumber(config)
    re_a, curv = _curvature_terms(config)
    L = config.crystal_length
    mu1 = 2.0 * (z + L) / k - curv
    mu2 = (2.0 * z + L) / k
    re_b = config.alpha * L / k
    return MomentumCoeffs(A=complex(re_a, mu1), B=complex(re_b, mu2), z=float(z))


def coord_coeffs(config: OpticalConfig, z: float) -> CoordCoeffs:
    m = momentum_coeffs(config, z)
    re_a, mu1 = m.A.real, m.A.imag
    re_b, mu2 = m.B.real, m.B.imag
    beta = re_b * re_b + mu2 * mu2
    gamma = re_a * re_a + mu1 * mu1
    norm = math.sqrt(re_a * re_b / (gamma * beta)) / math.pi
    return CoordCoeffs(beta=beta, gamma=gamma, mu1=mu1, mu2=mu2, norm=norm,
                       re_a=re_a, re_b=re_b, z=m.z)


def momentum_axis(coeffs: MomentumCoeffs, p, q):
    """One transverse-axis factor of the momentum amplitude (unit L2 norm in 1D)."""
    A, B = coeffs.A, coeffs.B
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    norm = (A.real * B.real / math.pi ** 2) ** 0.25
    return norm * np.exp(-(A * (p + q) ** 2 + B * (p - q) ** 2) / 4.0)


def coordinate_axis(coeffs: CoordCoeffs, xs, xi):
    """One transverse-axis factor of the coordinate amplitude (unit L2 norm in 1D)."""
    c = coeffs
    xs = np.asarray(xs, dtype=float)
    xi = np.asarray(xi, dtype=float)
    rel = (c.re_b - 1j * c.mu2) / (4.0 * c.beta)
    cm = (c.re_a - 1j * c.mu1) / (4.0 * c.gamma)
    return c.axis_norm * np.exp(-rel * (xs - xi) ** 2 - cm * (xs + xi) ** 2)


def mode_function_momentum(coeffs: MomentumCoeffs, p, q):
    """Biphoton amplitude Phi(p, q) for 2-vectors ``p``, ``q`` (last axis of length 2)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return momentum_axis(coeffs, p[..., 0], q[..., 0]) * momentum_axis(coeffs, p[..., 1], q[..., 1])


def wave_function_coord(coeffs: CoordCoeffs, x_s, x_i):
    """Biphoton amplitude Psi(x_s, x_i) for 2-vectors (last axis of length 2)."""
    x_s = np.asarray(x_s, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    return (coordinate_axis(coeffs, x_s[..., 0], x_i[..., 0])
            * coordinate_axis(coeffs, x_s[..., 1], x_i[..., 1]))


def sinc_gaussian_residual(b, x, alpha: float = SINC_GAUSSIAN_ALPHA):
    """``|sinc(b x^2) - exp(-alpha b x^2)|`` with the unnormalized sinc, sin(u)/u."""
    if np.any(np.asarray(b) <= 0):
        raise ValueError("b must be > 0")
    u = np.asarray(b, dtype=float) * np.asarray(x, dtype=float) ** 2
    return np.abs(np.sinc(u / np.pi) - np.exp(-alpha * u))


# -- reference and special-purpose configurations ------------------------------

CONFIG_KEYS = {
    "crystal_length_m": "crystal_length",
    "pump_waist_m": "pump_waist",
    "pump_wavelength_m": "pump_wavelength",
    "pump_refractive_index": "pump_refractive_index",
    "pump_inverse_curvature_per_m": "pump_inverse_curvature",
    "alpha": "alpha",
}


def reference_config() -> OpticalConfig:
    """L = 5 mm, w0 = 800 um, lambda_p = 800 nm, collimated, n_p = 1.455.

    n_p = 1.455 puts the migration point at 6.2 cm.
    """
    text = resources.files("biphoton").joinpath("data/reference_config.json").read_text()
    raw = json.loads(text)
    return OpticalConfig(**{attr: float(raw[key]) for key, attr in CONFIG_KEYS.items()})


def config_to_json_dict(config: OpticalConfig) -> dict:
    fields = asdict(config)
    return {key: fields[attr] for key, attr in CONFIG_KEYS.items()}


def equal_phase_config(config: OpticalConfig) -> OpticalConfig:
    """Return ``config`` with the pump curvature chosen so that mu1 == mu2 at every z.

    Requires ``L / (kp w0^2) <= 1/2``; the weaker of the two curvature
    solutions is returned.
    """
    k = pump_wavenumber(config)
    g = config.crystal_length / (k * config.pump_waist ** 2)
    if g > 0.5:
        raise ValueError("no pump curvature equalizes the phases for this crystal/waist")
    # -w0^2 t/(1+t^2) = L/k  ->  g t^2 + t + g = 0 (root of smaller magnitude)
    t = -(1.0 - math.sqrt(1.0 - 4.0 * g * g)) / (2.0 * g)
    inv_r = 2.0 * t / (config.pump_waist ** 2 * k)
    return replace(config, pump_inverse_curvature=inv_r)


def separable_config(crystal_length: float, pump_wavelength: float,
                     pump_refractive_index: float,
                     alpha: float = SINC_GAUSSIAN_ALPHA) -> OpticalConfig:
    """Pump waist and curvature for which A == B, i.e. a product state at all z."""
    k = 2.0 * math.pi * pump_refractive_index / pump_wavelength
    t = -1.0 / alpha
    w2 = alpha * crystal_length / k * (1.0 + t * t)
    inv_r = 2.0 * t / (w2 * k)
    return OpticalConfig(crystal_length=crystal_length, pump_waist=math.sqrt(w2),
                         pump_wavelength=pump_wavelength,
                         pump_refractive_index=pump_refractive_index,
                         pump_inverse_curvature=inv_r, alpha=alpha)
