"""Mach-Zehnder with a Dove prism in each arm, acting on the signal photon only.

Every optical element is a linear map ``T`` of the signal's transverse
coordinates together with an amplitude factor; a mode at ``r`` leaves at
``T r``, so the wavefunction transforms as ``psi_out(r) = psi_in(T r)``
(all maps used here are involutions).  A path through the interferometer
is a pair ``(coef, S)`` meaning ``coef * Psi(S r; r_i)``.

Layout: BS1 -> arm 1 (transmitted): Dove(theta1), fold mirrors -> BS2
          -> arm 2 (reflected):   Dove(theta2), fold mirrors -> BS2
Port ``a`` collects arm 1 reflected + arm 2 transmitted at BS2, port ``b``
the other two.  With two fold mirrors per arm and angles (pi/2, 0), port a
is the even-parity projection ``(Psi(r) + Psi(-r))/2`` and port b is
``(Psi(x,-y) - Psi(-x,y))/2`` up to a global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridError, GridField, normalization_check

MIRROR = np.array([[1.0, 0.0], [0.0, -1.0]])
IDENTITY = np.eye(2)


def mirror() -> np.ndarray:
    return MIRROR.copy()


def dove_prism(theta: float) -> np.ndarray:
    """Image flip about an inversion axis rotated by ``theta``."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, -s], [-s, -c]])


def beam_splitter(path):
    """Split ``(coef, S)`` into transmitted ``(coef, S)`` and reflected ``(i coef, S M)``."""
    coef, S = path
    return (coef, S), (1j * coef, S @ MIRROR)


def propagate(path, elements):
    coef, S = path
    for T in elements:
        S = S @ T
    return coef, S


def interferometer_paths(theta1: float, theta2: float, mirrors_per_arm: int = 2):
    """Symbolic (coef, S) terms reaching ports a and b, without the 1/sqrt(2) per splitter."""
    folds = [MIRROR] * mirrors_per_arm
    arm1, arm2 = beam_splitter((1.0 + 0j, IDENTITY))
    arm1 = propagate(arm1, [dove_prism(theta1)] + folds)
    arm2 = propagate(arm2, [dove_prism(theta2)] + folds)
    arm1_t, arm1_r = beam_splitter(arm1)
    arm2_t, arm2_r = beam_splitter(arm2)
    return {"a": [arm1_r, arm2_t], "b": [arm1_t, arm2_r]}


def _axis_signs(S: np.ndarray, tol: float = 1e-12) -> tuple[int, int]:
    if abs(S[0, 1]) > tol or abs(S[1, 0]) > tol:
        raise ValueError("Dove angles must be multiples of pi/2: rotated maps "
                         "do not keep the state separable in x and y")
    return int(round(S[0, 0])), int(round(S[1, 1]))


def _flip(f: np.ndarray, sign: int) -> np.ndarray:
    # centered grids are symmetric, so s -> -s is an index reversal
    return f if sign > 0 else f[::-1, :]


@dataclass
class PortField:
    """Output amplitude ``sum_t coef_t X_t(xs, xi) Y_t(ys, yi)`` at one port."""

    coefs: list
    x_factors: list
    y_factors: list
    weight_x: float
    weight_y: float

    def amplitude(self, ix_s, iy_s, ix_i, iy_i):
        out = 0
        for c, X, Y in zip(self.coefs, self.x_factors, self.y_factors):
            out = out + c * X[ix_s, ix_i] * Y[iy_s, iy_i]
        return out

    def density(self, ix_s, iy_s, ix_i, iy_i):
        return np.abs(self.amplitude(ix_s, iy_s, ix_i, iy_i)) ** 2

    def slice_map(self, iy_s: int, iy_i: int) -> np.ndarray:
        """Joint density over (x_s, x_i) with the y coordinates fixed at grid indices."""
        out = 0
        for c, X, Y in zip(self.coefs, self.x_factors, self.y_factors):
            out = out + c * X * Y[iy_s, iy_i]
        return np.abs(out) ** 2

    def probability(self) -> float:
        # |sum_t c_t X_t Y_t|^2 integrates to sum_tu c_t c_u* <X_u,X_t> <Y_u,Y_t>
        total = 0j
        n = len(self.coefs)
        for t in range(n):
            for u in range(n):
                gx = np.vdot(self.x_factors[u], self.x_factors[t]) * self.weight_x
                gy = np.vdot(self.y_factors[u], self.y_factors[t]) * self.weight_y
                total += self.coefs[t] * np.conj(self.coefs[u]) * gx * gy
        # a port that should be dark can come out at -1e-17 from cancellation
        return max(float(total.real), 0.0)


@dataclass
class InterferometerResult:
    p_plus: float
    p_minus: float
    ports: dict = field(repr=False)

    @property
    def schmidt_number(self) -> float:
        from .schmidt import entanglement_from_probabilities

        return entanglement_from_probabilities(self.p_plus, self.p_minus)


def simulate_interferometer(field_x: GridField, field_y: GridField,
                            theta1: float = math.pi / 2, theta2: float = 0.0,
                            mirrors_per_arm: int = 2) -> InterferometerResult:
    """Send the signal photon of ``field_x (x) field_y`` through the interferometer.

    Both fields must be coordinate-space single-axis amplitudes on centered
    grids.  Each beam-splitter pass carries an extra 1/sqrt(2), applied once
    at the end as an overall 1/2.
    """
    for f in (field_x, field_y):
        if normalization_check(f) > 1e-3:
            raise GridError("interferometer input is not normalized")
    paths = interferometer_paths(theta1, theta2, mirrors_per_arm)
    ports = {}
    for name, terms in paths.items():
        coefs, xs, ys = [], [], []
        for coef, S in terms:
            sx, sy = _axis_signs(S)
            coefs.append(0.5 * coef)
            xs.append(_flip(field_x.values, sx))
            ys.append(_flip(field_y.values, sy))
        ports[name] = PortField(coefs, xs, ys, field_x.weight, field_y.weight)
    return InterferometerResult(ports["a"].probability(), ports["b"].probability(), ports)
