"""Closed-form entanglement and correlation diagnostics of the Gaussian biphoton."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import CoordCoeffs, OpticalConfig, coord_coeffs, coordinate_axis, momentum_coeffs

DEFAULT_TAIL_CUTOFF = 1e-14


class NoMigrationPointError(ValueError):
    """e(z) - 1 keeps its sign over the searched interval."""


class FringeError(ValueError):
    pass


@dataclass(frozen=True)
class SchmidtData:
    """Parameters of the 1D reduced density matrix and its Schmidt spectrum.

    ``eigenvalues`` is empty until filled by :func:`schmidt_spectrum`.
    """

    a: float
    b: float
    c: float
    w: float
    eigenvalues: tuple = ()

    @property
    def K1d(self) -> float:
        return self.c / self.a

    @property
    def K(self) -> float:
        return (self.c / self.a) ** 2


@dataclass(frozen=True)
class FringeParams:
    """Envelope decay, fringe coupling and peak height of the port-difference pattern.

    The pattern is ``amplitude * exp(-R_plus (|xs|^2 + |xi|^2)) * cos(2 I_minus xs.xi)``.
    """

    R_plus: float
    I_minus: float
    amplitude: float


def _require_normalizable(A: complex, B: complex):
    if not (A.real > 0 and B.real > 0):
        raise ValueError("Re(A) and Re(B) must be > 0 for a normalizable state")


def schmidt_params(A: complex, B: complex) -> SchmidtData:
    _require_normalizable(A, B)
    a = A.real * B.real / (A + B).real
    b = abs(A - B) ** 2 / (8.0 * (A + B).real)
    c = math.sqrt(a * a + 2.0 * a * b)
    w = b / (a + b + c)
    return SchmidtData(a=a, b=b, c=c, w=w)


def schmidt_number(A: complex, B: complex) -> float:
    """Number of Schmidt modes of the full 2D state; 1 for a product state."""
    _require_normalizable(A, B)
    s, d = A + B, A - B
    return (s.real ** 2 + d.imag ** 2) / (s.real ** 2 - d.real ** 2)


def schmidt_spectrum(data: SchmidtData, tail_cutoff: float = DEFAULT_TAIL_CUTOFF) -> SchmidtData:
    """Fill in the 1D eigenvalues ``lambda_n = sqrt(a/c) sqrt(1-w^2) w^n``.

    The list stops before the first ``lambda_n < tail_cutoff * lambda_0``.
    """
    if not 0 < tail_cutoff < 1:
        raise ValueError("tail_cutoff must lie in (0, 1)")
    lam0 = math.sqrt(data.a / data.c) * math.sqrt(1.0 - data.w ** 2)
    if data.w == 0:
        n_terms = 1
    else:
        n_terms = int(math.floor(math.log(tail_cutoff) / math.log(data.w))) + 1
    eig = lam0 * data.w ** np.arange(n_terms)
    return SchmidtData(data.a, data.b, data.c, data.w, tuple(eig.tolist()))


def ellipticity(config: OpticalConfig, z: float) -> float:
    """Aspect ratio of |Psi|^2 in the (xs+xi, xs-xi) plane; < 1 means correlated positions."""
    c = coord_coeffs(config, z)
    return c.re_a * c.beta / (c.re_b * c.gamma)


def find_migration_point(config: OpticalConfig, z_max: float, tol: float = 1e-6) -> float:
    """Distance where the coordinate-space modulus factorizes (ellipticity 1).

    Scans a logarithmic ladder on ``[1e-6, z_max]`` for the first sign change
    of ``e(z) - 1`` and refines it by bisection to ``tol`` meters.
    """
    if not z_max > 0:
        raise ValueError("z_max must be > 0")

    def f(z):
        return ellipticity(config, z) - 1.0

    f0 = f(0.0)
    if abs(f0) < 1e-12:
        return 0.0
    lo = min(1e-6, z_max)
    ladder = np.concatenate(([0.0], np.geomspace(lo, z_max, 200)))
    values = [f0] + [f(z) for z in ladder[1:]]
    for (z_a, f_a), (z_b, f_b) in zip(zip(ladder, values), zip(ladder[1:], values[1:])):
        if f_b == 0:
            return float(z_b)
        if np.sign(f_a) != np.sign(f_b):
            return float(optimize.bisect(f, z_a, z_b, xtol=tol))
    raise NoMigrationPointError(f"ellipticity does not cross 1 on [0, {z_max}] m")


def _variance_ratio(e: float) -> float:
    # Gaussian exp(-u (x_s-x_i)^2 - v (x_s+x_i)^2), e = v/u:
    # marginal var (u+v)/(8uv) over conditional var 1/(2(u+v)).
    return (1.0 + e) ** 2 / (4.0 * e)


def fedorov_coordinate(config: OpticalConfig, z: float) -> float:
    """Unconditional over conditional (x_i = 0) variance of x_s."""
    return _variance_ratio(ellipticity(config, z))


def fedorov_momentum(config: OpticalConfig, z: float = 0.0) -> float:
    """Unconditional over conditional (p_i = 0) variance of p_s; independent of z."""
    m = momentum_coeffs(config, z)
    return _variance_ratio(m.A.real / m.B.real)


def interferometer_probabilities(A: complex, B: complex) -> tuple[float, float]:
    """Integrated coincidence probabilities of the symmetric and antisymmetric ports."""
    K = schmidt_number(A, B)
    p_plus = 0.5 * (1.0 + 1.0 / K)
    return p_plus, 1.0 - p_plus


def entanglement_from_probabilities(p_plus: float, p_minus: float) -> float:
    if p_minus < 0 or p_plus < 0:
        raise ValueError("port probabilities must be non-negative")
    if not p_plus > p_minus:
        raise ValueError("degenerate ports: P+ must exceed P- (infinite or negative K)")
    return (p_plus + p_minus) / (p_plus - p_minus)


def fringe_params(config: OpticalConfig, z: float) -> FringeParams:
    """Envelope and fringe coefficients of the port-difference pattern at ``z``.

    The peak height is fixed so that the pattern integrates to ``1/K``.
    """
    c = coord_coeffs(config, z)
    m = momentum_coeffs(config, z)
    R = c.re_a / c.gamma + c.re_b / c.beta
    I = c.mu1 / c.gamma - c.mu2 / c.beta
    K = schmidt_number(m.A, m.B)
    # integral of exp(-R(|x|^2+|y|^2)) cos(2I x.y) over R^4 is pi^2 / (R^2 + I^2)
    return FringeParams(R_plus=R, I_minus=I, amplitude=(R * R + I * I) / (math.pi ** 2 * K))


def slice_fringe_params(config: OpticalConfig, z: float) -> FringeParams:
    """Parameters that make :func:`p_diff` exact on the slice y_s = y_i = 0.

    Evaluating the two port probabilities directly from Psi gives, on that
    slice, ``exp(-R_plus/2 (xs^2+xi^2)) cos(I_minus xs xi)``: half the decay
    and half the coupling of :func:`fringe_params`.
    """
    full = fringe_params(config, z)
    c = coord_coeffs(config, z)
    return FringeParams(full.R_plus / 2.0, full.I_minus / 2.0, c.norm ** 2)


def p_diff(params: FringeParams, x_s, x_i):
    """Port-difference coincidence pattern for 2-vectors ``x_s``, ``x_i``."""
    x_s = np.asarray(x_s, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    r2 = np.sum(x_s ** 2, axis=-1) + np.sum(x_i ** 2, axis=-1)
    dot = np.sum(x_s * x_i, axis=-1)
    return params.amplitude * np.exp(-params.R_plus * r2) * np.cos(2.0 * params.I_minus * dot)


def port_probabilities(coeffs: CoordCoeffs, x_s, x_i):
    """Joint detection densities (P_a, P_b) of the two signal ports.

    P_a = |Psi(x, y) + Psi(-x, -y)|^2 / 4 and P_b = |Psi(x, -y) - Psi(-x, y)|^2 / 4,
    with the idler coordinates held fixed.
    """
    x_s = np.asarray(x_s, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    xs, ys = x_s[..., 0], x_s[..., 1]
    xi, yi = x_i[..., 0], x_i[..., 1]

    def psi(a, b):
        return coordinate_axis(coeffs, a, xi) * coordinate_axis(coeffs, b, yi)

    p_a = 0.25 * np.abs(psi(xs, ys) + psi(-xs, -ys)) ** 2
    p_b = 0.25 * np.abs(psi(xs, -ys) - psi(-xs, ys)) ** 2
    return p_a, p_b


def p_diff_exact(coeffs: CoordCoeffs, x_s, x_i):
    """Closed form of ``P_a - P_b`` obtained by expanding the port densities.

    ``P_a - P_b = D(xs,xi) D(ys,yi) / 4 + N^4 exp(-R/2 r^2) cos(I xs xi) cos(I ys yi)``
    with ``D(s, i) = |psi(s,i)|^2 - |psi(-s,i)|^2``.  ``D`` vanishes when the
    ellipticity is 1 or on the axes s = 0, i = 0.
    """
    c = coeffs
    x_s = np.asarray(x_s, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    R = c.re_a / c.gamma + c.re_b / c.beta
    I = c.mu1 / c.gamma - c.mu2 / c.beta

    def odd_part(s, i):
        return np.abs(coordinate_axis(c, s, i)) ** 2 - np.abs(coordinate_axis(c, -s, i)) ** 2

    r2 = np.sum(x_s ** 2, axis=-1) + np.sum(x_i ** 2, axis=-1)
    cross = (c.norm ** 2 * np.exp(-0.5 * R * r2)
             * np.cos(I * x_s[..., 0] * x_i[..., 0]) * np.cos(I * x_s[..., 1] * x_i[..., 1]))
    return 0.25 * odd_part(x_s[..., 0], x_i[..., 0]) * odd_part(x_s[..., 1], x_i[..., 1]) + cross


def fringe_damping(params: FringeParams, x_i: float) -> float:
    """Envelope decay per squared fringe phase along the x_s slice at fixed ``x_i``."""
    return params.R_plus / (4.0 * (params.I_minus * x_i) ** 2)


def fringe_phase_of_maximum(params: FringeParams, x_i: float, order: int = 2) -> float:
    """Fringe phase ``theta = 2 |I_minus x_i| x_s`` of the order-th maximum along x_s > 0.

    Order 1 is the central maximum at x_s = 0.  Along the slice the pattern
    is ``exp(-kappa theta^2) cos(theta)``; the order-m maximum is the single
    root of ``2 kappa theta cos(theta) + sin(theta)`` in
    ``(2 pi (m-1) - pi/2, 2 pi (m-1))``.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    if x_i == 0 or params.I_minus == 0:
        raise FringeError("no fringes: I_minus * x_i == 0")
    kappa = fringe_damping(params, x_i)
    center = 2.0 * math.pi * (order - 1)

    def slope(theta):
        return 2.0 * kappa * theta * math.cos(theta) + math.sin(theta)

    theta = optimize.brentq(slope, center - math.pi / 2, center, xtol=1e-15, rtol=1e-15)
    if math.exp(-kappa * theta * theta) * math.cos(theta) < 1e-12:
        raise FringeError(f"no maximum of order {order} within the envelope")
    return theta


def locate_fringe_maximum(params: FringeParams, x_i: float, order: int = 2) -> float:
    """x_s > 0 of the order-th local maximum of p_diff on the slice (x_s, 0; x_i, 0)."""
    theta = fringe_phase_of_maximum(params, x_i, order)
    return theta / (2.0 * abs(params.I_minus * x_i))
