"""Acceptance criteria 1-8, each reporting one PASS/FAIL line."""
import math
import time

import numpy as np
import pytest
from scipy import optimize

from biphoton import cli
from biphoton import grid as g
from biphoton import interferometer as itf
from biphoton import schmidt as s
from biphoton.checks import random_coefficient_pairs, random_configs
from biphoton.model import (
    coord_coeffs,
    coordinate_axis,
    equal_phase_config,
    momentum_coeffs,
)


def _ellipticity(n, z, L=5e-3, w0=8e-4, lam=8e-7, alpha=0.455):
    # written from the beta, gamma definitions; shares no code with the package
    k = 2 * math.pi * n / lam
    beta = (alpha * L / k) ** 2 + ((2 * z + L) / k) ** 2
    gamma = w0 ** 4 + (2 * (z + L) / k) ** 2
    return k * w0 ** 2 * beta / (alpha * L * gamma)


def _K(config, z):
    m = momentum_coeffs(config, z)
    return s.schmidt_number(m.A, m.B)


def test_criterion_1_migration_point(ref, report):
    t = time.perf_counter()
    z0 = s.find_migration_point(ref, 0.2)
    elapsed = time.perf_counter() - t
    oracle = optimize.bisect(lambda z: _ellipticity(1.455, z) - 1, 1e-6, 0.2, xtol=1e-12)
    n_for_quoted = optimize.brentq(
        lambda n: optimize.bisect(lambda z: _ellipticity(n, z) - 1, 1e-6, 0.5, xtol=1e-12) - 0.062, 1.3, 1.7, xtol=1e-10)
    ok = (abs(z0 - 0.062) <= 0.003 and abs(z0 - oracle) < 1e-6 and ref.pump_refractive_index == 1.455
          and abs(n_for_quoted - 1.455) < 5e-4 and elapsed < 0.1)
    report("criterion 1 (migration point)", ok,
           f"z0 = {z0 * 100:.4f} cm (target 6.2 +- 0.3), oracle {oracle * 100:.4f} cm, "
           f"n_p for exactly 6.2 cm = {n_for_quoted:.5f}, {elapsed * 1e3:.1f} ms")
    assert ok


def test_criterion_2_vanishing_intensity_correlation(ref, report):
    t = time.perf_counter()
    z0 = s.find_migration_point(ref, 0.2)
    fx = s.fedorov_coordinate(ref, z0)
    f = g.sample_coordinate_grid(ref, z0, g.default_grid(ref, z0, "coordinate", 512))
    f_num = g.numeric_moments(f)[2]
    K = _K(ref, z0)
    elapsed = time.perf_counter() - t
    ok = abs(fx - 1) <= 1e-6 and abs(f_num - 1) <= 0.01 and K == pytest.approx(8.0e2, rel=0.01) and elapsed < 10
    report("criterion 2 (F_x = 1 while entangled)", ok,
           f"F_x(z0) - 1 = {fx - 1:.2e}, grid F = {f_num:.6f}, K = {K:.2f}, {elapsed:.2f} s")
    assert ok


def test_criterion_3_k_invariant_in_z(ref, report):
    t = time.perf_counter()
    z0 = s.find_migration_point(ref, 0.2)
    zs = [0.0, z0, 0.2]
    closed = [_K(ref, z) for z in zs]
    numeric = [g.numeric_schmidt(g.sample_coordinate_grid(ref, z, g.default_grid(ref, z, "coordinate", 512)))[1]
               for z in zs]
    elapsed = time.perf_counter() - t
    spread = (max(closed) - min(closed)) / closed[0]
    worst = max(abs(n - c) / c for n, c in zip(numeric, closed))
    ok = spread <= 1e-12 and worst < 0.01 and elapsed < 30
    report("criterion 3 (K independent of z)", ok,
           f"closed-form spread {spread:.1e}, worst SVD deviation {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_4_schmidt_identities(report):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = worst_trace = 0.0
    for A, B in random_coefficient_pairs(rng, 1000):
        k4 = s.schmidt_number(A, B)
        d = s.schmidt_spectrum(s.schmidt_params(A, B))
        k_ca = (d.c / d.a) ** 2
        k_direct = 1 + abs(A - B) ** 2 / (4 * A.real * B.real)
        worst = max(worst, abs(k4 - k_ca) / k4, abs(k4 - k_direct) / k4, abs(k_ca - k_direct) / k_direct)
        worst_trace = max(worst_trace, abs(math.fsum(d.eigenvalues) - 1))
    elapsed = time.perf_counter() - t
    ok = worst <= 1e-12 and worst_trace <= 1e-9 and elapsed < 1
    report("criterion 4 (K identities, 1000 pairs)", ok,
           f"worst pairwise {worst:.1e}, worst trace {worst_trace:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_5_interferometer_equivalence(ref, report):
    t = time.perf_counter()
    f = g.sample_coordinate_grid(ref, 0.0, g.default_grid(ref, 0.0, "coordinate", 256))
    res = itf.simulate_interferometer(f, f, math.pi / 2, 0.0)
    c = coord_coeffs(ref, 0.0)
    rng = np.random.default_rng(1)
    idx = rng.integers(0, f.points, (5000, 4))
    x = f.coords_s
    X, Y, XI, YI = (x[idx[:, k]] for k in range(4))

    def psi(a, b):
        return coordinate_axis(c, a, XI) * coordinate_axis(c, b, YI)

    pa = 0.25 * np.abs(psi(X, Y) + psi(-X, -Y)) ** 2
    pb = 0.25 * np.abs(psi(X, -Y) - psi(-X, Y)) ** 2
    keep = pa + pb > 1e-8 * c.norm ** 2
    sa, sb = res.ports["a"].density(*idx.T), res.ports["b"].density(*idx.T)
    pointwise = max(np.max(np.abs(sa - pa)[keep] / (pa + pb)[keep]), np.max(np.abs(sb - pb)[keep] / (pa + pb)[keep]))
    m = momentum_coeffs(ref, 0.0)
    pp, pm = s.interferometer_probabilities(m.A, m.B)
    perr = max(abs(res.p_plus - pp), abs(res.p_minus - pm))
    kerr = abs(res.schmidt_number - _K(ref, 0.0)) / _K(ref, 0.0)
    elapsed = time.perf_counter() - t
    ok = pointwise <= 1e-10 and perr <= 1e-3 and kerr <= 0.01 and elapsed < 60
    report("criterion 5 (interferometer equivalence)", ok,
           f"pointwise {pointwise:.1e}, P+- error {perr:.1e}, K recovery {kerr:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_6_fringe_identity(ref, report):
    fp = s.fringe_params(ref, 0.0)
    K = _K(ref, 0.0)
    # grid quadrature: the 4D integral factorizes into the square of a 2D one
    n = 600
    h = 8 / math.sqrt(fp.R_plus)
    x = (np.arange(n) - n / 2 + 0.5) * (2 * h / n)
    XS, XI = np.meshgrid(x, x, indexing="ij")
    one_axis = np.sum(np.exp(-fp.R_plus * (XS ** 2 + XI ** 2)) * np.cos(2 * fp.I_minus * XS * XI)) * (2 * h / n) ** 2
    quad_err = abs(fp.amplitude * one_axis ** 2 - 1 / K) * K

    bound_ok, gaps = True, []
    for R in np.geomspace(fp.R_plus, fp.R_plus * 1e-6, 13):
        theta = s.fringe_phase_of_maximum(s.FringeParams(R, fp.I_minus, fp.amplitude), math.sqrt(2 / fp.R_plus), 2)
        bound_ok &= math.pi < theta < 2 * math.pi
        gaps.append(2 * math.pi - theta)
    limit_ok = bool(np.all(np.diff(gaps) < 0)) and gaps[-1] < 1e-5

    theta_ref = s.fringe_phase_of_maximum(fp, math.sqrt(2 / fp.R_plus), 2)
    coeff = theta_ref / (2 * math.pi)
    ok = quad_err <= 1e-4 and bound_ok and limit_ok
    report("criterion 6 (fringe identity)", ok,
           f"quadrature error {quad_err:.1e}, theta* in (pi, 2pi): {bound_ok}, 2pi - theta* -> {gaps[-1]:.1e}")
    near = abs(coeff - 0.953) <= 0.03
    report("criterion 6 reference slice", None,
           f"z = 0, x_i = sqrt(2/R+): theta*/2pi = {coeff:.4f} vs 0.953 +- 0.03 -> "
           f"{'within' if near else 'outside'} (informative, not gating)")
    assert ok


def test_criterion_7_fedorov_gate(ref, report):
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_x = worst_p = 0.0
    for cfg, z in random_configs(rng, 20):
        f = g.sample_coordinate_grid(cfg, z, g.default_grid(cfg, z, "coordinate", 512, min_cells=2.0))
        worst_x = max(worst_x, abs(g.numeric_moments(f)[2] / s.fedorov_coordinate(cfg, z) - 1))
        f = g.sample_momentum_grid(cfg, z, g.default_grid(cfg, z, "momentum", 512, min_cells=2.0))
        worst_p = max(worst_p, abs(g.numeric_moments(f)[2] / s.fedorov_momentum(cfg, z) - 1))
    eq = equal_phase_config(ref)
    eq_err = abs(s.fedorov_momentum(eq) / _K(eq, 0.0) - 1)
    elapsed = time.perf_counter() - t
    ok = worst_x < 0.005 and worst_p < 0.005 and eq_err <= 1e-12 and elapsed < 60
    report("criterion 7 (Fedorov closed forms)", ok,
           f"worst F_x {worst_x:.1e}, worst F_p {worst_p:.1e}, F_p/K - 1 at mu1 = mu2: {eq_err:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_8_map_shapes(tmp_path, report):
    shapes = {}
    for label in ("0", "z0", "0.2"):
        out = tmp_path / f"map_{label}.csv"
        assert cli.main(["map", "--z", label, "--out", str(out)]) == 0
        meta = dict(l[2:].split(" = ", 1) for l in out.read_text().splitlines() if l.startswith("# ") and " = " in l)
        shapes[label] = (float(meta["principal_axis_ratio"]), float(meta["major_axis_angle_deg"]))
    (r0, a0), (rz, _), (r2, a2) = shapes["0"], shapes["z0"], shapes["0.2"]
    ok = r0 > 1 and abs(a0 - 45) < 1e-3 and abs(rz - 1) <= 1e-3 and r2 > 1 and abs(a2 + 45) < 1e-3
    report("criterion 8 (coincidence map shapes)", ok,
           f"z=0 ratio {r0:.2f} at {a0:+.1f} deg, z0 ratio {rz:.6f}, z=20cm ratio {r2:.2f} at {a2:+.1f} deg")
    assert ok
