"""Bridge checks: potential graphs, torus assembly, Weierstrass surfaces."""

from __future__ import annotations

import numpy as np
import pytest

from klfib.bridges import (
    IsotropicCurve,
    NonPositiveGaussLiftError,
    ScalarGrid,
    SurfaceGrid,
    core_box,
    deep_interior,
    gauss_cr_residual,
    gauss_map,
    graph_section,
    isotropy_residual,
    ma_maximal_crosscheck,
    ma_residual,
    node_triple,
    surface_mean_curvature,
    torus_g2_assemble,
    weierstrass,
)
from klfib.hyper import is_hypersymplectic, wedge_gram
from klfib.sections import max_mnorm, mean_curvature


def quadratic_potential(shape=(17, 17, 17), hstep=1.0 / 16):
    """F with constant Hessian; det Hess = 2 * 1.5 - 0.0625 adjustments."""
    H = np.array([[2.0, 0.25, 0.0], [0.25, 1.5, 0.0], [0.0, 0.0, 1.0]])

    def f(t1, t2, t3):
        t = np.stack([t1, t2, t3], axis=-1)
        return 0.5 * np.einsum("...i,ij,...j->...", t, H, t)

    return ScalarGrid.from_function(f, shape, hstep), float(np.linalg.det(H))


def curved_potential(shape=(17, 17, 17), hstep=1.0 / 16):
    """Analytic solution of det Hess F = 1 with genuinely varying Hessian."""

    def f(t1, t2, t3):
        return t2 ** 2 / (2.0 * (t1 + 1.0)) + (t1 + 1.0) ** 3 / 6.0 + t3 ** 2 / 2.0

    return ScalarGrid.from_function(f, shape, hstep)


def test_core_box_and_deep_interior():
    assert deep_interior((9, 9, 9)) == (slice(2, 7),) * 3
    core = core_box((17, 17, 17))
    assert core == (slice(4, 13),) * 3
    # scale-invariant: refining the grid keeps the same physical box
    c33 = core_box((33, 33, 33))
    assert c33 == (slice(8, 25),) * 3


def test_scalar_grid_validation_and_hessian():
    with pytest.raises(ValueError):
        ScalarGrid(np.zeros((2, 3, 3)), 0.1)
    with pytest.raises(ValueError):
        ScalarGrid(np.zeros((3, 3, 3)), -1.0)
    F, detH = quadratic_potential(shape=(7, 7, 7), hstep=0.25)
    H = F.hessian()
    expected = np.array([[2.0, 0.25, 0.0], [0.25, 1.5, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(H - expected).max() < 1e-10  # stencils exact on quadratics
    assert np.abs(H - np.swapaxes(H, -1, -2)).max() < 1e-12


def test_graph_section_metric():
    F, _ = quadratic_potential(shape=(9, 9, 9), hstep=0.125)
    h = graph_section(F)
    from klfib.sections import induced_metric
    g, _ = induced_metric(h)
    H = np.array([[2.0, 0.25, 0.0], [0.25, 1.5, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(g - 2.0 * H).max() < 1e-10  # split pairing: g = 2 Hess F


def test_ma_crosscheck_quadratic_is_exact():
    F, C = quadratic_potential()
    res, mnorm = ma_maximal_crosscheck(F, C)
    assert res < 1e-12
    assert mnorm < 1e-10


def test_ma_crosscheck_curved_solution():
    F = curved_potential()
    res, mnorm = ma_maximal_crosscheck(F, 1.0)
    # analytic solution: both maxima are truncation error (boundary stencils
    # dominate the full-grid sup, so the level is modest at n = 17)
    assert res < 0.1
    assert mnorm < 0.5
    # a non-solution shows a residual at least an order of magnitude larger
    Fbad = ScalarGrid(F.values + 0.01 * np.sin(
        2 * np.pi * np.arange(17)[:, None, None] / 16.0)
        * np.sin(2 * np.pi * np.arange(17)[None, :, None] / 16.0), F.hstep)
    res_b, mnorm_b = ma_maximal_crosscheck(Fbad, 1.0)
    assert res_b > 10 * res and mnorm_b > 10 * mnorm


def test_ma_residual_constant_shift():
    F, C = quadratic_potential(shape=(7, 7, 7), hstep=0.25)
    assert np.abs(ma_residual(F, C)).max() < 1e-12
    assert np.abs(ma_residual(F, C - 1.0) - 1.0).max() < 1e-12


def test_node_triple_unit_hessian_is_standard():
    from klfib.hyper import HyperTriple
    t = node_triple(np.eye(3))
    std = HyperTriple.standard()
    for a, b in zip(t.omega, std.omega):
        assert np.array_equal(a.coeffs, b.coeffs)


def test_node_triple_gram_tracks_hessian():
    rng = np.random.default_rng(60)
    B = rng.standard_normal((3, 3))
    H = B @ B.T + 0.5 * np.eye(3)  # positive definite
    t = node_triple(H)
    ok, _ = is_hypersymplectic(t)
    assert ok
    # wedge Gram of beta_i + H_ij gamma_j is H + H^T = 2H
    assert np.allclose(wedge_gram(t), 2.0 * H, atol=1e-12)


def test_torus_assembly_exact_solution_orders():
    reports = []
    for n in (17, 33):
        F = curved_potential(shape=(n, n, n), hstep=1.0 / (n - 1))
        reports.append(torus_g2_assemble(F))
    for r in reports:
        assert r.dphi_residual < 1e-13  # exact by Hessian symmetry
        assert r.lam_range[0] > 0
    order = np.log(reports[0].dstar_residual / reports[1].dstar_residual) / np.log(2.0)
    assert order > 1.7
    d = reports[0].to_json()
    assert set(d) == {"dphi_residual", "dstar_residual", "lam_range", "shape", "hstep"}


def test_torus_assembly_rejects_nonconvex_potential():
    def f(t1, t2, t3):
        return -0.5 * (t1 ** 2 + t2 ** 2 + t3 ** 2)

    F = ScalarGrid.from_function(f, (7, 7, 7), 0.25)
    with pytest.raises(ValueError):
        torus_g2_assemble(F)


def test_isotropic_curve_exactness():
    c = IsotropicCurve.q1_standard()
    assert isotropy_residual(c) == 0.0
    assert isotropy_residual(c.scaled(2.0 + 1.0j)) == 0.0
    bad = IsotropicCurve(1, (np.array([1.0, 0.0]), np.array([1.0]), np.array([0.5])))
    assert isotropy_residual(bad) > 0
    c2 = IsotropicCurve.from_json(c.to_json())
    for p, q in zip(c.polys, c2.polys):
        assert np.array_equal(p, q)


def test_weierstrass_guards():
    bad = IsotropicCurve(1, (np.array([1.0]), np.array([1.0]), np.array([1.0])))
    with pytest.raises(ValueError):
        weierstrass(bad)
    with pytest.raises(ValueError):
        weierstrass(IsotropicCurve.q1_standard(), shape=(9, 17))


def test_weierstrass_surface_is_maximal_second_order():
    c = IsotropicCurve.q1_standard()
    errs = []
    for n in (17, 33):
        s = weierstrass(c, shape=(n, n))
        m = surface_mean_curvature(s)
        core = core_box(s.shape)
        errs.append(np.abs(m[core]).max())
    order = np.log(errs[0] / errs[1]) / np.log(2.0)
    assert order > 1.7


def test_gauss_map_quadric_residual_small():
    s = weierstrass(IsotropicCurve.q1_standard(), shape=(17, 17))
    e1, e2, resid = gauss_map(s)
    assert resid < 1e-10  # frames are orthonormalized exactly
    P = s.space.matrix
    assert np.abs(np.einsum("...a,ab,...b->...", e1, P, e1) - 1.0).max() < 1e-12


def test_gauss_cr_residual_second_order():
    c = IsotropicCurve.q1_standard()
    errs = [gauss_cr_residual(weierstrass(c, shape=(n, n))) for n in (17, 33)]
    order = np.log(errs[0] / errs[1]) / np.log(2.0)
    assert order > 1.7


def test_gauss_cr_residual_flags_nonholomorphic():
    # warp the surface: the lift of the warped graph is far from holomorphic
    s = weierstrass(IsotropicCurve.q1_standard(), shape=(17, 17))
    vals = s.values.copy()
    u = np.arange(17) * s.hstep
    vals[..., 0] += 0.02 * np.sin(4 * u)[:, None] * np.cos(3 * u)[None, :]
    warped = SurfaceGrid(vals, s.hstep, s.space)
    assert gauss_cr_residual(warped) > 10 * gauss_cr_residual(s)
