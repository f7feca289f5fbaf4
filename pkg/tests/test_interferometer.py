import math

import numpy as np
import pytest

from biphoton import grid as g
from biphoton import interferometer as itf
from biphoton import schmidt as s
from biphoton.model import (
    coord_coeffs,
    coordinate_axis,
    momentum_coeffs,
    separable_config,
)


def _field(config, z, points=256):
    return g.sample_coordinate_grid(config, z, g.default_grid(config, z, "coordinate", points, min_cells=1.0))


def test_element_matrices():
    assert np.allclose(itf.mirror(), np.diag([1.0, -1.0]))
    assert np.allclose(itf.dove_prism(0.0), np.diag([1.0, -1.0]))
    assert np.allclose(itf.dove_prism(math.pi / 2), np.diag([-1.0, 1.0]))
    r = itf.dove_prism(math.pi / 8)
    assert np.allclose(r @ r, np.eye(2))
    assert np.linalg.det(r) == pytest.approx(-1.0)


def test_beam_splitter_reflection_flips_y():
    t, r = itf.beam_splitter((1.0, np.eye(2)))
    assert t[0] == 1.0 and np.allclose(t[1], np.eye(2))
    assert r[0] == 1j and np.allclose(r[1], np.diag([1.0, -1.0]))


def test_paths_reproduce_port_labels():
    paths = itf.interferometer_paths(math.pi / 2, 0.0)
    a = {tuple(np.diag(S).astype(int)): c for c, S in paths["a"]}
    b = {tuple(np.diag(S).astype(int)): c for c, S in paths["b"]}
    # a: Psi(r) + Psi(-r) with a common phase; b: Psi(x,-y) - Psi(-x,y)
    assert set(a) == {(1, 1), (-1, -1)}
    assert a[(1, 1)] == pytest.approx(a[(-1, -1)])
    assert set(b) == {(1, -1), (-1, 1)}
    assert b[(1, -1)] == pytest.approx(-b[(-1, 1)])


def test_single_fold_mirror_swaps_ports():
    two = itf.interferometer_paths(math.pi / 2, 0.0, 2)
    one = itf.interferometer_paths(math.pi / 2, 0.0, 1)
    maps = lambda terms: sorted(tuple(np.diag(S).astype(int)) for _, S in terms)
    assert maps(one["a"]) == maps(two["b"])
    assert maps(one["b"]) == maps(two["a"])


def test_rotated_dove_angle_rejected(ref):
    f = _field(ref, 0.0)
    with pytest.raises(ValueError, match="multiples of pi/2"):
        itf.simulate_interferometer(f, f, theta1=math.pi / 8)


def test_unnormalized_input_rejected(ref):
    f = _field(ref, 0.0)
    with pytest.raises(g.GridError):
        itf.simulate_interferometer(f.scaled(1.1), f)


def test_product_state_exits_symmetric_port():
    cfg = separable_config(5e-3, 8e-7, 1.455, 0.455)
    f = _field(cfg, 0.0)
    res = itf.simulate_interferometer(f, f)
    assert res.p_plus == pytest.approx(1.0, abs=1e-6)
    assert 0.0 <= res.p_minus <= 1e-6
    assert res.schmidt_number == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("z", [0.0, 0.062, 0.2])
def test_reference_probabilities_and_k(ref, z):
    f = _field(ref, z)
    res = itf.simulate_interferometer(f, f)
    m = momentum_coeffs(ref, z)
    pp, pm = s.interferometer_probabilities(m.A, m.B)
    assert res.p_plus == pytest.approx(pp, abs=1e-3)
    assert res.p_minus == pytest.approx(pm, abs=1e-3)
    assert res.schmidt_number == pytest.approx(s.schmidt_number(m.A, m.B), rel=0.01)


def test_probability_against_brute_force_sum(ref):
    # the Gram factorization against an explicit sum over the 4D grid
    cfg = ref.with_changes(pump_waist=6e-5)
    f = g.sample_coordinate_grid(cfg, 0.01, g.default_grid(cfg, 0.01, "coordinate", 40, min_cells=1.0))
    res = itf.simulate_interferometer(f, f)
    n = f.points
    idx = np.indices((n, n, n, n)).reshape(4, -1)
    for name in ("a", "b"):
        dens = res.ports[name].density(idx[0], idx[1], idx[2], idx[3])
        assert res.ports[name].probability() == pytest.approx(np.sum(dens) * f.weight ** 2, rel=1e-12)


def test_pointwise_port_densities(ref):
    c = coord_coeffs(ref, 0.0)
    f = _field(ref, 0.0)
    res = itf.simulate_interferometer(f, f)
    rng = np.random.default_rng(5)
    idx = rng.integers(0, f.points, (3000, 4))
    x = f.coords_s
    xs = np.stack([x[idx[:, 0]], x[idx[:, 1]]], -1)
    xi = np.stack([x[idx[:, 2]], x[idx[:, 3]]], -1)

    # direct evaluation of the two port formulas, independent of the package's port code
    def psi(a, b, ia, ib):
        return coordinate_axis(c, a, ia) * coordinate_axis(c, b, ib)

    X, Y, XI, YI = xs[:, 0], xs[:, 1], xi[:, 0], xi[:, 1]
    pa = 0.25 * np.abs(psi(X, Y, XI, YI) + psi(-X, -Y, XI, YI)) ** 2
    pb = 0.25 * np.abs(psi(X, -Y, XI, YI) - psi(-X, Y, XI, YI)) ** 2
    sa = res.ports["a"].density(*idx.T)
    sb = res.ports["b"].density(*idx.T)
    scale = np.maximum(pa + pb, 1e-300)
    keep = (pa + pb) > 1e-8 * c.norm ** 2
    assert np.max(np.abs(sa - pa)[keep] / scale[keep]) < 1e-10
    assert np.max(np.abs(sb - pb)[keep] / scale[keep]) < 1e-10


def test_difference_matches_exact_fringe_form(ref):
    c = coord_coeffs(ref, 0.0)
    f = _field(ref, 0.0)
    res = itf.simulate_interferometer(f, f)
    x = f.coords_s
    # the y_s = y_i = 0 slice does not sit on the even grid, so use the nearest pair
    j = int(np.argmin(np.abs(x)))
    diff = res.ports["a"].slice_map(j, j) - res.ports["b"].slice_map(j, j)
    XS, XI = np.meshgrid(x, x, indexing="ij")
    pts_s = np.stack([XS, np.full_like(XS, x[j])], -1)
    pts_i = np.stack([XI, np.full_like(XI, x[j])], -1)
    exact = s.p_diff_exact(c, pts_s, pts_i)
    width = 1 / math.sqrt(s.fringe_params(ref, 0.0).R_plus / 2)
    inside = XS ** 2 + XI ** 2 <= (3 * width) ** 2
    peak = np.max(np.abs(exact))
    assert np.max(np.abs(diff - exact)[inside]) < 1e-6 * peak
