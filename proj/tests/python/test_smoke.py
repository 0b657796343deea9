import math
import os
from pathlib import Path

import numpy as np
import pytest

import pathslice as ps

SOURCE = Path(os.environ.get("PATHSLICE_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_supertrace_paths_agree():
    rng = np.random.default_rng(0)
    for n in (2, 4):
        size = 1 << n
        deg = np.array([bin(i).count("1") for i in range(size)])
        m = rng.normal(size=(size, size)) * (deg[:, None] == deg[None, :])
        assert abs(ps.supertrace(m) - ps.supertrace_berezin(m)) < 1e-12 * max(1.0, np.abs(m).max())
    assert ps.supertrace(np.eye(4)) == 0.0


def test_t_norm_monotone_and_validated():
    m = np.diag([1.0, 2.0, 3.0, 4.0])
    assert ps.t_norm(m, 0.25, 0.1) <= ps.t_norm(m, 0.25, 0.01)
    with pytest.raises(ValueError):
        ps.t_norm(m, 0.7, 0.1)


def test_sphere_geometry_and_kernel():
    s = ps.Manifold.sphere2()
    y = np.array([0.0, 0.0, 1.0])
    x = s.exp_map(y, np.array([0.3, 0.1]))
    assert np.allclose(s.log_map(y, x), [0.3, 0.1])
    assert s.scalar_curvature(y) == pytest.approx(2.0)
    k = ps.approximate_kernel(s, y, y, 0.1)
    h = 1.0 / (2 * math.pi * 0.1)
    assert np.allclose(np.diag(k), h * math.exp(-0.1 / 3) * np.array([1.05, 1, 1, 1.05]))
    assert ps.pfaffian_curvature(s, y) == pytest.approx(1.0)


def test_torus_kernel_is_gaussian_identity():
    t = ps.Manifold.torus([2 * math.pi, 2 * math.pi])
    x, y = np.array([0.2, 0.1]), np.array([0.0, 0.0])
    k = ps.approximate_kernel(t, x, y, 0.1)
    h = math.exp(-0.05 / 0.2) / (2 * math.pi * 0.1)
    assert np.abs(k - h * np.eye(4)).max() < 1e-14 * h


def test_gbc_limit_and_euler_characteristic():
    s = ps.Manifold.sphere2()
    scan = ps.gbc_limit_scan(s, s.random_point(3), [0.04, 0.02, 0.01, 0.005])
    assert scan["deviation"] < 1e-10
    grid = ps.Grid.gauss_legendre(s, 8, 16)
    assert grid.total_weight() == pytest.approx(4 * math.pi)
    chi = ps.euler_characteristic_estimate(grid, 0.2, 0)
    assert abs(chi - 2.0) < 0.2


def test_flat_semigroup_defect():
    t = ps.Manifold.torus([2 * math.pi, 2 * math.pi])
    grid = ps.Grid.torus_uniform(t, 32)
    assert ps.semigroup_defect(grid, 0.1, 0.1) < 1e-8


def test_experiment_and_config_errors(tmp_path):
    out = ps.run_experiment("geom", str(SOURCE / "configs" / "sphere.json"), str(tmp_path / "geom"))
    assert out["pass"]
    assert (tmp_path / "geom" / "geom_summary.json").exists()
    with pytest.raises(ValueError, match="0 < epsilon < 1/2"):
        ps.run_experiment("geom", str(SOURCE / "configs" / "bad_epsilon.json"), str(tmp_path / "bad"))
