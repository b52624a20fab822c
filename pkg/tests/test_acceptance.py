"""Acceptance suite: thirteen numbered criteria, one pass/fail line each.

Every test prints exactly one line "criterion NN <name>: PASS|FAIL (...)" and
then asserts, so the verdicts survive in captured output either way.
"""

from __future__ import annotations

import json
import os
import time

import numpy as np

from klfib import bridges, curvature, exterior, fields, flow, hyper, lattice, sections
from klfib.cli import EXIT_OK, main


def verdict(num, name, ok, detail):
    print(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num:02d} {name}: {detail}"


def random_triple(rng, amp=0.4):
    while True:
        M = np.eye(3) + amp * rng.standard_normal((3, 3))
        P = np.eye(4) + amp * rng.standard_normal((4, 4))
        if np.linalg.det(M) < 0.1 or np.linalg.det(P) < 0.1:
            continue  # near-singular recombinations blow up the relative error
        t = hyper.HyperTriple.standard().mixed(M).pullback(P)
        ok, margin = hyper.is_hypersymplectic(t)
        if not ok or margin < 0.01:
            continue  # keep the wedge Gram reasonably conditioned
        try:
            exterior.metric_of(hyper.assemble_phi(t, 1.0))
        except exterior.NotPositiveError:
            continue
        return t


def flow_fixture(n, amplitude, space="split3"):
    """Normally perturbed flat graph with exact boundary data."""
    sp = sections.SignatureSpace.split3()

    def exact(t1, t2, t3):
        t = np.stack([t1, t2, t3], axis=-1)
        return np.concatenate([t, t], axis=-1)

    h = sections.SectionGrid.from_function(exact, (n, n, n), 1.0 / (n - 1), sp)
    t1, t2, t3 = np.meshgrid(*h.axes(), indexing="ij")
    bump = np.sin(np.pi * t1) * np.sin(np.pi * t2) * np.sin(np.pi * t3)
    v = h.values.copy()
    v[..., 0] += amplitude * bump
    v[..., 3] -= amplitude * bump
    v[..., 1] += 0.5 * amplitude * bump
    v[..., 4] -= 0.5 * amplitude * bump
    if space == "split3":
        return h, h.with_values(v)
    # isometric embedding of the split pairing into the U^3 lattice block
    def embed(vals):
        out = np.zeros(vals.shape[:3] + (22,))
        for i in range(3):
            out[..., 2 * i] = vals[..., i]
            out[..., 2 * i + 1] = vals[..., 3 + i]
        return out

    k3 = sections.SignatureSpace.k3()
    return (sections.SectionGrid(embed(h.values), h.hstep, k3),
            sections.SectionGrid(embed(v), h.hstep, k3))


def test_criterion_01_hodge_star_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        t = random_triple(rng)
        lam = float(10.0 ** rng.uniform(-1, 1))
        phi = hyper.assemble_phi(t, lam)
        star = exterior.hodge_star(phi, exterior.metric_of(phi))
        _, mu = hyper.theta_mu(t, lam)
        recon = hyper.embed_x(mu)
        for th, (i, j, k) in zip(hyper.theta_forms(t, lam), hyper.CYCLIC):
            recon = recon + exterior.wedge(
                hyper.embed_x(th), exterior.AltForm.monomial(7, (4 + j, 4 + k)))
        err = np.abs(star.coeffs - recon.coeffs).max() / np.abs(star.coeffs).max()
        worst = max(worst, float(err))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-9 and elapsed <= 30.0
    verdict(1, "dual-form coefficients match the 7-dim Hodge star", ok,
            f"max rel err {worst:.2e} <= 1e-9 over 1000 triples, {elapsed:.1f}s <= 30s")


def test_criterion_02_model_form():
    phi0 = exterior.standard_phi0()
    e = exterior.metric_of(phi0)
    r1 = float(np.abs(e.metric - np.eye(7)).max())
    r2 = abs(exterior.inner(phi0, phi0, e) - 7.0)
    ok_co, resid = exterior.coassociative_check(
        phi0, exterior.Subspace(7, np.eye(7)[:4]))
    ok = r1 <= 1e-12 and r2 <= 1e-12 and ok_co and resid == 0.0
    verdict(2, "model form metric, norm, co-associative plane", ok,
            f"metric err {r1:.1e}, norm err {r2:.1e}, plane residual {resid}")


def test_criterion_03_closed_field_identity():
    rng = np.random.default_rng(2)
    steps = (1e-2, 5e-3, 2.5e-3)
    worst_order = np.inf
    measured = 0
    for _ in range(100):
        fld = fields.random_closed_positive_field(rng)
        v = rng.standard_normal(7)
        p = 0.1 * rng.standard_normal(7)
        res = [fields.closed_identity_residual(fld, v, p, s) for s in steps]
        if res[0] < 1e-10:
            continue  # residual at the roundoff floor, order unmeasurable
        order = min(np.log2(res[0] / res[1]), np.log2(res[1] / res[2]))
        worst_order = min(worst_order, order)
        measured += 1
    ok = worst_order >= 1.9 and measured >= 90
    verdict(3, "closed-field identity residual decays at second order", ok,
            f"min order {worst_order:.3f} >= 1.9 on {measured}/100 fields")


def test_criterion_04_exchange_map():
    rng = np.random.default_rng(3)
    std = hyper.HyperTriple.standard()
    mats = []
    for w in std.omega:
        W = np.zeros((4, 4))
        for (a, b), c in zip(exterior.index_tuples(4, 2), w.coeffs):
            W[a, b] = c
            W[b, a] = -c
        mats.append(W.T)
    I, J, K = mats
    quat_err = 0.0
    for _ in range(100):
        v = rng.standard_normal((3, 4))
        a = hyper.s_map(std, v)
        quat = np.stack([J @ v[2] - K @ v[1],
                         K @ v[0] - I @ v[2],
                         I @ v[1] - J @ v[0]])
        quat_err = max(quat_err, float(np.abs(a - quat).max()))
    round_err = 0.0
    for _ in range(10):
        t = random_triple(rng)
        for _ in range(100):
            v = rng.standard_normal((3, 4))
            back = hyper.s_inverse(t, hyper.s_map(t, v))
            round_err = max(round_err,
                            float(np.abs(back - v).max() / max(np.abs(v).max(), 1.0)))
    ok = quat_err == 0.0 and round_err <= 1e-10
    verdict(4, "exchange map: quaternionic model and round trip", ok,
            f"quaternionic err {quat_err}, round-trip err {round_err:.2e} <= 1e-10 "
            f"on 1000 inputs")


def test_criterion_05_lattice_exact():
    g = lattice.gram()
    ev = np.linalg.eigvalsh(g.astype(float))
    sig_ok = (ev > 0).sum() == 3 and (ev < 0).sum() == 19
    det_ok = abs(lattice.gram_det_exact()) == 1
    roots_ok = len(lattice.e8_roots()) == 240
    rng = np.random.default_rng(4)
    refl_ok = True
    root = lattice.LatticeVector.from_blocks(u=(1, -1, 0, 0, 0, 0))
    datum = lattice.ReflectionDatum(root)
    for _ in range(200):
        v = lattice.LatticeVector(tuple(int(x) for x in rng.integers(-9, 10, 22)))
        img = lattice.reflect(datum, v)
        if not isinstance(img, lattice.LatticeVector):
            refl_ok = False
        if lattice.reflect(datum, img) != v:
            refl_ok = False
        if lattice.pairing(img, img) != lattice.pairing(v, v):
            refl_ok = False
    ok = sig_ok and det_ok and roots_ok and refl_ok
    verdict(5, "lattice signature, determinant, roots, reflections", ok,
            f"signature (3,19) {sig_ok}, |det|=1 {det_ok}, 240 roots {roots_ok}, "
            f"integer involutive isometries {refl_ok}")


def test_criterion_06_flow_convergence():
    start = time.monotonic()
    exact, h0 = flow_fixture(17, 0.1)
    params = flow.FlowParams(stop_mnorm=1e-6, max_steps=100000)
    final, trace = flow.mcf_run(h0, params)
    elapsed = time.monotonic() - start
    mnorm_ok = trace.mnorms[-1] <= 1e-6 * trace.mnorms[0]
    steps_ok = trace.steps[-1] <= 100000
    sup = float(np.abs(final.values - exact.values).max())
    sup_ok = sup <= 5.0 * exact.hstep ** 2
    vols = np.asarray(trace.volumes)
    mono_ok = bool(np.all(np.diff(vols) >= -1e-10 * np.abs(vols[:-1])))
    ok = mnorm_ok and steps_ok and sup_ok and mono_ok and elapsed <= 300.0
    verdict(6, "flow drives a perturbed 17^3 section to the exact graph", ok,
            f"residual ratio {trace.mnorms[-1] / trace.mnorms[0]:.1e} <= 1e-6 in "
            f"{trace.steps[-1]} steps, sup err {sup:.2e} <= {5 * exact.hstep ** 2:.2e}, "
            f"volume monotone {mono_ok}, {elapsed:.0f}s <= 300s")


def test_criterion_07_ma_bridge():
    n, h = 33, 1.0 / 32
    quad = bridges.ScalarGrid.from_function(
        lambda t1, t2, t3: t1 ** 2 + 0.75 * t2 ** 2 + 0.5 * t3 ** 2 + 0.25 * t1 * t2,
        (n, n, n), h)
    C = float(np.linalg.det(np.array([[2.0, 0.25, 0.0],
                                      [0.25, 1.5, 0.0],
                                      [0.0, 0.0, 1.0]])))
    res_q, mc_q = bridges.ma_maximal_crosscheck(quad, C)
    bump = bridges.ScalarGrid.from_function(
        lambda t1, t2, t3: t1 ** 2 + 0.75 * t2 ** 2 + 0.5 * t3 ** 2
        + 0.01 * np.sin(2 * np.pi * t1) * np.sin(2 * np.pi * t2),
        (n, n, n), h)
    res_b, mc_b = bridges.ma_maximal_crosscheck(bump, C)
    ok = res_q == 0.0 and mc_q <= 1e-11 and res_b >= 1e-3 and mc_b >= 1e-3
    verdict(7, "constant-determinant potentials are exactly maximal graphs", ok,
            f"quadratic ({res_q}, {mc_q:.1e}), non-solution ({res_b:.1e}, {mc_b:.1e})"
            f" both >= 1e-3")


def test_criterion_08_torus_assembly():
    def potential(t1, t2, t3):
        a = t1 + 1.0
        return t2 ** 2 / (2.0 * a) + a ** 3 / 6.0 + t3 ** 2 / 2.0

    reports = []
    for n in (17, 33, 65):
        F = bridges.ScalarGrid.from_function(potential, (n, n, n), 1.0 / (n - 1))
        reports.append(bridges.torus_g2_assemble(F))
    dphi = max(r.dphi_residual for r in reports)
    orders = [float(np.log2(a.dstar_residual / b.dstar_residual))
              for a, b in zip(reports, reports[1:])]
    ok = dphi <= 1e-13 and all(o >= 1.9 for o in orders)
    verdict(8, "torus assembly: exact closedness, second-order co-closedness", ok,
            f"dphi {dphi:.1e} <= 1e-13, dstar orders "
            + ", ".join(f"{o:.2f}" for o in orders) + " >= 1.9")


def test_criterion_09_weierstrass():
    curve = bridges.IsotropicCurve.q1_standard()
    rows = []
    for n in (17, 33, 65):
        surf = bridges.weierstrass(curve, shape=(n, n))
        core = bridges.core_box(surf.shape)
        m = bridges.surface_mean_curvature(surf)
        rows.append({
            "m": float(np.sqrt((m[core] ** 2).sum(axis=-1)).max()),
            "quadric": bridges.gauss_map(surf)[2],
            "cr": bridges.gauss_cr_residual(surf),
        })
    m_orders = [np.log2(a["m"] / b["m"]) for a, b in zip(rows, rows[1:])]
    cr_orders = [np.log2(a["cr"] / b["cr"]) for a, b in zip(rows, rows[1:])]
    quadric = max(r["quadric"] for r in rows)
    ok = (all(o >= 1.9 for o in m_orders + cr_orders) and quadric <= 1e-10)
    verdict(9, "Weierstrass surfaces: maximality and holomorphic Gauss lift", ok,
            "mean-curvature orders " + ", ".join(f"{o:.2f}" for o in m_orders)
            + ", CR orders " + ", ".join(f"{o:.2f}" for o in cr_orders)
            + f" >= 1.9, quadric {quadric:.1e} <= 1e-10")


def test_criterion_10_ricci_nonnegativity():
    # flow-converged maximal sections at two resolutions plus a lattice target
    cs = {}
    worst = {}
    for label, n, space in (("split3-9", 9, "split3"), ("split3-17", 17, "split3"),
                            ("k3-9", 9, "k3")):
        _, h0 = flow_fixture(n, 0.1, space=space)
        final, _ = flow.mcf_run(h0, flow.FlowParams(stop_mnorm=1e-6))
        R = curvature.induced_ricci(final)
        core = bridges.core_box(final.shape)
        min_eig = float(np.linalg.eigvalsh(R)[core][..., 0].min())
        worst[label] = min_eig
        cs[label] = max(max(0.0, -min_eig) / final.hstep ** 2, 1e-4)
    ratio = max(cs.values()) / min(cs.values())
    stable = ratio <= 2.0
    # Gauss-derivative characterization on the curved analytic maximal fixture
    def potential(t1, t2, t3):
        a = t1 + 1.0
        return t2 ** 2 / (2.0 * a) + a ** 3 / 6.0 + t3 ** 2 / 2.0

    errs = []
    for n in (9, 17):
        F = bridges.ScalarGrid.from_function(potential, (n, n, n), 1.0 / (n - 1))
        h = bridges.graph_section(F)
        core = bridges.core_box(h.shape)
        diff = (curvature.induced_ricci(h) - curvature.gauss_derivative_ricci(h))[core]
        errs.append(float(np.abs(diff).max()))
    order = float(np.log2(errs[0] / errs[1]))
    ok = stable and all(v >= -2.0 * 0.125 ** 2 for v in worst.values()) and order >= 1.9
    verdict(10, "maximal sections have non-negative Ricci up to truncation", ok,
            f"min eigenvalues {', '.join(f'{k}: {v:.1e}' for k, v in worst.items())}, "
            f"C ratio {ratio:.2f} <= 2, Gauss-derivative match order {order:.2f} >= 1.9")


def test_criterion_11_cayley_identity():
    rng = np.random.default_rng(5)
    kernel_err = 0.0
    general_err = 0.0
    for _ in range(10000):
        samp = curvature.CayleySample.wedge_kernel(rng.standard_normal((3, 3)))
        lhs, rhs = curvature.cayley_trace_identity(samp)
        t = np.asarray(samp.t)
        kernel_err = max(kernel_err, abs(lhs + float(t @ t)))
        gen = curvature.CayleySample.of(rng.standard_normal(3),
                                        rng.standard_normal((3, 3)))
        lhs, rhs = curvature.cayley_trace_identity(gen)
        general_err = max(general_err, abs(lhs - rhs))
    ok = kernel_err <= 1e-12 and general_err <= 1e-12
    verdict(11, "trace identity for the Cayley quadratic map", ok,
            f"kernel err {kernel_err:.1e}, general err {general_err:.1e} <= 1e-12 "
            f"on 10000 samples each")


def test_criterion_12_perp_negativity():
    rng = np.random.default_rng(6)
    space = sections.SignatureSpace.k3()
    base = np.zeros((3, 22))
    for i in range(3):
        base[i, 2 * i] = base[i, 2 * i + 1] = 1.0
    failures = 0
    for _ in range(1000):
        while True:
            M = np.eye(3) + 0.5 * rng.standard_normal((3, 3))
            B = M @ base + 0.3 * rng.standard_normal((3, 22))
            if np.linalg.eigvalsh(B @ space.matrix @ B.T).min() > 1e-6:
                break
        if not sections.perp_negativity(B, space):
            failures += 1
    ok = failures == 0
    verdict(12, "complements of positive 3-frames are negative definite", ok,
            f"{failures}/1000 failures")


def test_criterion_13_reproducibility(tmp_path):
    blobs = []
    for sub in ("run1", "run2"):
        out = str(tmp_path / sub)
        rc = main(["verify-algebra", "--seed", "1", "--out", out])
        assert rc == EXIT_OK
        with open(os.path.join(out, "verify_algebra.json"), "rb") as f:
            blobs.append(f.read())
    ok = blobs[0] == blobs[1] and json.loads(blobs[0])["pass"] is True
    verdict(13, "seeded verification reports are byte-identical", ok,
            f"{len(blobs[0])} bytes, identical {blobs[0] == blobs[1]}")
