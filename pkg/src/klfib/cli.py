"""Command line driver: verification suites, solvers, and report rendering.

Every subcommand reads an optional JSON config file (--config); command line
flags override config fields, which override built-in defaults.  All random
suites draw from one generator seeded by --seed, so runs are reproducible;
JSON reports are written with sorted keys and contain no timestamps (those go
to a sibling ``<name>.meta.json``), making repeated runs byte-identical.

Exit codes: 0 on success, 1 when an assertion or numeric solve fails, 2 for
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bridges, curvature, exterior, fields, flow, hyper, lattice, paths, sections

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Configuration or invocation problem (exit code 2)."""


_ERROR_CODES = {
    "NotPositiveError": "not_positive",
    "NonPositiveSectionError": "not_positive_section",
    "PositivityLostError": "positivity_lost",
    "NoConvergenceError": "no_convergence",
    "SingularTripleError": "singular_triple",
    "FrameDegeneracyError": "frame_degeneracy",
    "NonPositiveGaussLiftError": "gauss_lift_not_positive",
}


def _error_payload(exc: Exception) -> dict:
    code = _ERROR_CODES.get(type(exc).__name__, "numeric_failure")
    return {"error": {"code": code, "message": str(exc)}}


# ---------------------------------------------------------------------------
# config and output plumbing
# ---------------------------------------------------------------------------

def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(
            f"config {path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: top level must be a JSON object")
    return cfg


def _settings(args, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    out = dict(defaults)
    cfg = _load_config(getattr(args, "config", None))
    for k, v in cfg.items():
        if k not in defaults:
            raise UsageError(f"unknown config field {k!r}")
        out[k] = v
    for k in defaults:
        v = getattr(args, k.replace("-", "_"), None)
        if v is not None:
            out[k] = v
    return out


def _write_json(outdir: str, name: str, payload: dict) -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name + ".json")
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    meta = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "argv": sys.argv[1:],
    }
    with open(os.path.join(outdir, name + ".meta.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _item(max_residual: float, tolerance: float) -> dict:
    return {
        "max_residual": float(max_residual),
        "tolerance": float(tolerance),
        "pass": bool(max_residual <= tolerance),
    }


# ---------------------------------------------------------------------------
# verify-algebra
# ---------------------------------------------------------------------------

def _random_triple(rng: np.random.Generator, amp: float = 0.4) -> hyper.HyperTriple:
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


def _dual_reconstruction_error(t: hyper.HyperTriple, lam: float) -> float:
    """Relative mismatch between theta_mu and the 7-dimensional Hodge star."""
    phi = hyper.assemble_phi(t, lam)
    star = exterior.hodge_star(phi, exterior.metric_of(phi))
    _, mu = hyper.theta_mu(t, lam)
    thetas = hyper.theta_forms(t, lam)
    recon = hyper.embed_x(mu)
    for i, j, k in hyper.CYCLIC:
        dt_jk = exterior.AltForm.monomial(7, (4 + j, 4 + k))
        recon = recon + exterior.wedge(hyper.embed_x(thetas[i]), dt_jk)
    scale = np.abs(star.coeffs).max()
    return float(np.abs(star.coeffs - recon.coeffs).max() / scale)


def _suite_model_form() -> float:
    phi0 = exterior.standard_phi0()
    e = exterior.metric_of(phi0)
    r = float(np.abs(e.metric - np.eye(7)).max())
    r = max(r, abs(exterior.inner(phi0, phi0, e) - 7.0))
    # the x 4-plane is co-associative: phi0 restricts to zero on it
    plane = exterior.Subspace(7, np.eye(7)[:4])
    ok, resid = exterior.coassociative_check(phi0, plane)
    r = max(r, resid if ok else 1.0)
    return r


def _suite_hodge(rng: np.random.Generator, samples: int, threads: int) -> float:
    seeds = rng.integers(0, 2 ** 63 - 1, size=samples)

    def one(seed):
        r = np.random.default_rng(int(seed))
        lam = float(10.0 ** r.uniform(-1, 1))
        return _dual_reconstruction_error(_random_triple(r), lam)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            errs = list(ex.map(one, seeds, chunksize=max(1, samples // (4 * threads))))
    else:
        errs = [one(s) for s in seeds]
    return max(errs)


def _suite_s_map(rng: np.random.Generator, samples: int) -> float:
    # quaternionic formula on the standard triple
    std = hyper.HyperTriple.standard()
    Imats = []
    for w in std.omega:
        W = np.zeros((4, 4))
        for (a, b), c in zip(exterior.index_tuples(4, 2), w.coeffs):
            W[a, b] = c
            W[b, a] = -c
        Imats.append(W.T)
    I, J, K = Imats
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal((3, 4))
        a = hyper.s_map(std, v)
        quat = np.stack([J @ v[2] - K @ v[1],
                         K @ v[0] - I @ v[2],
                         I @ v[1] - J @ v[0]])
        worst = max(worst, float(np.abs(a - quat).max()))
    # round trip on a random triple
    t = _random_triple(rng)
    for _ in range(samples):
        v = rng.standard_normal((3, 4))
        back = hyper.s_inverse(t, hyper.s_map(t, v))
        worst = max(worst, float(np.abs(back - v).max() / max(np.abs(v).max(), 1.0)))
    return worst


def _suite_cayley(rng: np.random.Generator, samples: int) -> float:
    worst = 0.0
    for _ in range(samples):
        lhs, rhs = curvature.cayley_trace_identity(curvature.CayleySample.of(
            rng.standard_normal(3), rng.standard_normal((3, 3))))
        worst = max(worst, abs(lhs - rhs))
        samp = curvature.CayleySample.wedge_kernel(rng.standard_normal((3, 3)))
        lhs, rhs = curvature.cayley_trace_identity(samp)
        worst = max(worst, abs(lhs - rhs))
    return worst


def _random_positive_frame(rng: np.random.Generator,
                           space: sections.SignatureSpace) -> np.ndarray:
    Q = space.matrix
    # seed plane: positive combinations in the hyperbolic blocks
    base = np.zeros((3, space.dim))
    for i in range(3):
        base[i, 2 * i] = base[i, 2 * i + 1] = 1.0
    while True:
        M = np.eye(3) + 0.5 * rng.standard_normal((3, 3))
        B = M @ base + 0.3 * rng.standard_normal((3, space.dim))
        if np.linalg.eigvalsh(B @ Q @ B.T).min() > 1e-6:
            return B


def _suite_perp(rng: np.random.Generator, samples: int) -> float:
    space = sections.SignatureSpace.k3()
    failures = 0
    for _ in range(samples):
        if not sections.perp_negativity(_random_positive_frame(rng, space), space):
            failures += 1
    return float(failures)


def _suite_closed_fields(rng: np.random.Generator, count: int = 20) -> float:
    worst_defect = 0.0
    for _ in range(count):
        fld = fields.random_closed_positive_field(rng)
        v = rng.standard_normal(7)
        p = rng.standard_normal(7) * 0.1
        res = [fields.closed_identity_residual(fld, v, p, s)
               for s in (1e-2, 5e-3, 2.5e-3)]
        order = min(np.log2(res[0] / res[1]), np.log2(res[1] / res[2]))
        worst_defect = max(worst_defect, max(0.0, 1.9 - order))
    return worst_defect


def cmd_verify_algebra(args) -> int:
    s = _settings(args, {
        "seed": 1, "samples": 1000, "out": "out", "threads": 1,
    })
    rng = np.random.default_rng(int(s["seed"]))
    items = {
        "model_form": _item(_suite_model_form(), 1e-12),
        "dual_form_oracle": _item(
            _suite_hodge(rng, int(s["samples"]), int(s["threads"])), 1e-9),
        "exchange_map": _item(_suite_s_map(rng, int(s["samples"])), 1e-10),
        "cayley_trace": _item(_suite_cayley(rng, int(s["samples"])), 1e-12),
        "perp_negativity_failures": _item(_suite_perp(rng, int(s["samples"])), 0.0),
        "closed_identity_order_defect": _item(_suite_closed_fields(rng), 0.0),
    }
    payload = {
        "command": "verify-algebra",
        "seed": int(s["seed"]),
        "samples": int(s["samples"]),
        "items": items,
        "pass": all(v["pass"] for v in items.values()),
    }
    _write_json(s["out"], "verify_algebra", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# lattice-scan
# ---------------------------------------------------------------------------

def cmd_lattice_scan(args) -> int:
    s = _settings(args, {
        "height": 2, "blocks": "u1,u2,u3", "max_results": 200000,
        "out": "out", "seed": 1, "threads": 1,
    })
    blocks = tuple(b.strip() for b in str(s["blocks"]).split(",") if b.strip())
    for b in blocks:
        if b not in lattice.ALL_BLOCKS:
            raise UsageError(f"unknown block {b!r}; choose from {lattice.ALL_BLOCKS}")
    try:
        scan = lattice.minus_two_classes(int(s["height"]), blocks,
                                         max_results=int(s["max_results"]))
    except ValueError as e:
        payload = {"command": "lattice-scan", **_error_payload(e)}
        _write_json(s["out"], "lattice_scan", payload)
        return EXIT_FAIL
    payload = {
        "command": "lattice-scan",
        "height_bound": int(s["height"]),
        "blocks": list(blocks),
        "count": len(scan),
        "gram_det": lattice.gram_det_exact(),
        "e8_root_count": len(lattice.e8_roots()),
        "pass": lattice.gram_det_exact() == -1 and len(lattice.e8_roots()) == 240,
    }
    os.makedirs(s["out"], exist_ok=True)
    with open(os.path.join(s["out"], "lattice_scan.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["height"] + [f"c{i}" for i in range(22)])
        for v in list(scan)[:1000]:
            w.writerow([v.height()] + list(v.coords))
    _write_json(s["out"], "lattice_scan", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# solve-maximal
# ---------------------------------------------------------------------------

def _flow_fixture(n: int, amplitude: float):
    """Perturbed flat-graph section with exact boundary data."""
    space = sections.SignatureSpace.split3()

    def exact(t1, t2, t3):
        t = np.stack([t1, t2, t3], axis=-1)
        return np.concatenate([t, t], axis=-1)

    h = sections.SectionGrid.from_function(exact, (n, n, n), 1.0 / (n - 1), space)
    t1, t2, t3 = np.meshgrid(*h.axes(), indexing="ij")
    bump = np.sin(np.pi * t1) * np.sin(np.pi * t2) * np.sin(np.pi * t3)
    v = h.values.copy()
    # normal perturbation: (w, -w) pairs are pairing-orthogonal to the tangents
    v[..., 0] += amplitude * bump
    v[..., 3] -= amplitude * bump
    v[..., 1] += 0.5 * amplitude * bump
    v[..., 4] -= 0.5 * amplitude * bump
    return h, h.with_values(v)


def cmd_solve_maximal(args) -> int:
    s = _settings(args, {
        "n": 17, "amplitude": 0.1, "stop_mnorm": 1e-6, "max_steps": 100000,
        "dt_safety": 0.2, "out": "out", "seed": 1, "threads": 1,
    })
    exact, start = _flow_fixture(int(s["n"]), float(s["amplitude"]))
    params = flow.FlowParams(dt_safety=float(s["dt_safety"]),
                             max_steps=int(s["max_steps"]),
                             stop_mnorm=float(s["stop_mnorm"]))
    os.makedirs(s["out"], exist_ok=True)
    try:
        final, trace = flow.mcf_run(start, params)
    except (flow.PositivityLostError, flow.NoConvergenceError) as e:
        payload = {"command": "solve-maximal", **_error_payload(e)}
        if e.trace is not None:
            with open(os.path.join(s["out"], "flow_trace.csv"), "w") as f:
                f.write(e.trace.to_csv())
        _write_json(s["out"], "solve_maximal", payload)
        return EXIT_FAIL
    with open(os.path.join(s["out"], "flow_trace.csv"), "w") as f:
        f.write(trace.to_csv())
    final.save(os.path.join(s["out"], "maximal_section"))
    sup_error = float(np.abs(final.values - exact.values).max())
    volumes = np.asarray(trace.volumes)
    monotone = bool(np.all(np.diff(volumes) >= -1e-10 * np.abs(volumes[:-1])))
    payload = {
        "command": "solve-maximal",
        "n": int(s["n"]),
        "steps": trace.steps[-1],
        "final_mnorm": trace.mnorms[-1],
        "initial_mnorm": trace.mnorms[0],
        "sup_error_vs_exact": sup_error,
        "sup_error_budget": 5.0 * exact.hstep ** 2,
        "volume_monotone": monotone,
        "pass": bool(monotone and sup_error <= 5.0 * exact.hstep ** 2),
    }
    _write_json(s["out"], "solve_maximal", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# ma-bridge / torus-g2
# ---------------------------------------------------------------------------

def _ma_potential(t1, t2, t3):
    """Analytic potential with det Hess = 1, genuinely curved."""
    a = t1 + 1.0
    return t2 ** 2 / (2.0 * a) + a ** 3 / 6.0 + t3 ** 2 / 2.0


def cmd_ma_bridge(args) -> int:
    s = _settings(args, {"n": 33, "out": "out", "seed": 1, "threads": 1})
    n = int(s["n"])
    h = 1.0 / (n - 1)
    quad = bridges.ScalarGrid.from_function(
        lambda t1, t2, t3: t1 ** 2 + 0.75 * t2 ** 2 + 0.5 * t3 ** 2 + 0.25 * t1 * t2,
        (n, n, n), h)
    Cq = np.linalg.det(np.array([[2.0, 0.25, 0.0],
                                 [0.25, 1.5, 0.0],
                                 [0.0, 0.0, 1.0]]))
    res_q, mc_q = bridges.ma_maximal_crosscheck(quad, Cq)
    bump = bridges.ScalarGrid.from_function(
        lambda t1, t2, t3: t1 ** 2 + 0.75 * t2 ** 2 + 0.5 * t3 ** 2
        + 0.01 * np.sin(2 * np.pi * t1) * np.sin(2 * np.pi * t2),
        (n, n, n), h)
    res_b, mc_b = bridges.ma_maximal_crosscheck(bump, Cq)
    payload = {
        "command": "ma-bridge",
        "n": n,
        "quadratic": {"ma_residual": res_q, "mean_curvature": mc_q},
        "non_ma": {"ma_residual": res_b, "mean_curvature": mc_b},
        "pass": bool(res_q == 0.0 and mc_q <= 1e-11
                     and res_b >= 1e-3 and mc_b >= 1e-3),
    }
    _write_json(s["out"], "ma_bridge", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


def cmd_torus_g2(args) -> int:
    s = _settings(args, {"sizes": [17, 33, 65], "out": "out", "seed": 1, "threads": 1})
    sizes = [int(x) for x in s["sizes"]]
    reports = []
    for n in sizes:
        F = bridges.ScalarGrid.from_function(_ma_potential, (n, n, n), 1.0 / (n - 1))
        reports.append(bridges.torus_g2_assemble(F))
    orders = [float(np.log2(a.dstar_residual / b.dstar_residual))
              for a, b in zip(reports, reports[1:])]
    payload = {
        "command": "torus-g2",
        "sizes": sizes,
        "reports": [r.to_json() for r in reports],
        "dstar_orders": orders,
        "pass": bool(max(r.dphi_residual for r in reports) <= 1e-13
                     and all(o >= 1.9 for o in orders)),
    }
    _write_json(s["out"], "torus_g2", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# weierstrass
# ---------------------------------------------------------------------------

def cmd_weierstrass(args) -> int:
    s = _settings(args, {"sizes": [17, 33, 65], "out": "out", "seed": 1, "threads": 1})
    sizes = [int(x) for x in s["sizes"]]
    curve = bridges.IsotropicCurve.q1_standard()
    rows = []
    for n in sizes:
        surf = bridges.weierstrass(curve, shape=(n, n))
        core = bridges.core_box(surf.shape)
        m = bridges.surface_mean_curvature(surf)
        m_res = float(np.sqrt((m[core] ** 2).sum(axis=-1)).max())
        _, _, quadric = bridges.gauss_map(surf)
        cr = bridges.gauss_cr_residual(surf)
        rows.append({"n": n, "mean_curvature": m_res, "quadric": quadric, "cr": cr})
    m_orders = [float(np.log2(a["mean_curvature"] / b["mean_curvature"]))
                for a, b in zip(rows, rows[1:])]
    cr_orders = [float(np.log2(a["cr"] / b["cr"])) for a, b in zip(rows, rows[1:])]
    payload = {
        "command": "weierstrass",
        "rows": rows,
        "mean_curvature_orders": m_orders,
        "cr_orders": cr_orders,
        "pass": bool(all(o >= 1.9 for o in m_orders + cr_orders)
                     and max(r["quadric"] for r in rows) <= 1e-10),
    }
    _write_json(s["out"], "weierstrass", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# gradient-path
# ---------------------------------------------------------------------------

def cmd_gradient_path(args) -> int:
    s = _settings(args, {
        "n": 33, "start": [0.5, 0.5, 0.5], "klass": [0, 0, 0, 1.0, 0.3, 0],
        "step": 0.01, "max_steps": 2000, "out": "out", "seed": 1, "threads": 1,
    })
    n = int(s["n"])
    space = sections.SignatureSpace.split3()

    def graph(t1, t2, t3):
        a = t1 + 1.0
        f1 = -t2 ** 2 / (2.0 * a ** 2) + a ** 2 / 2.0
        return np.stack([t1, t2, t3, f1, t2 / a, t3], axis=-1)

    h = sections.SectionGrid.from_function(graph, (n, n, n), 1.0 / (n - 1), space)
    p = paths.gradient_path(h, np.asarray(s["klass"], dtype=float),
                            tuple(float(x) for x in s["start"]),
                            paths.PathParams(step=float(s["step"]),
                                             max_steps=int(s["max_steps"])))
    os.makedirs(s["out"], exist_ok=True)
    with open(os.path.join(s["out"], "gradient_path.jsonl"), "w") as f:
        f.write(p.to_jsonl())
    ascending = bool(np.all(np.diff(p.profile) >= -1e-12))
    payload = {
        "command": "gradient-path",
        "nodes": int(len(p.nodes)),
        "stop_reason": p.stop_reason,
        "profile_ascending": ascending,
        "f_start": float(p.profile[0]),
        "f_end": float(p.profile[-1]),
        "pass": ascending,
    }
    _write_json(s["out"], "gradient_path", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(obj, (int, float, bool, str)) or obj is None:
        rows.append((prefix, obj))


def cmd_report(args) -> int:
    s = _settings(args, {"out": "out", "seed": 1, "threads": 1})
    outdir = s["out"]
    if not os.path.isdir(outdir):
        raise UsageError(f"output directory {outdir} does not exist")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = sorted(f for f in os.listdir(outdir)
                   if f.endswith(".json") and not f.endswith(".meta.json")
                   and f != "report.json")
    aggregate = {}
    rows = []
    for fn in names:
        with open(os.path.join(outdir, fn)) as f:
            doc = json.load(f)
        key = fn[:-len(".json")]
        aggregate[key] = doc
        _flatten(key, doc, rows)
    with open(os.path.join(outdir, "report.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["metric", "value"])
        w.writerows(rows)
    figures = []
    trace_path = os.path.join(outdir, "flow_trace.csv")
    if os.path.exists(trace_path):
        data = np.genfromtxt(trace_path, delimiter=",", names=True)
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
        ax1.plot(data["step"], data["volume"])
        ax1.set_xlabel("step")
        ax1.set_ylabel("volume")
        ax2.semilogy(data["step"], data["mnorm"])
        ax2.set_xlabel("step")
        ax2.set_ylabel("max mean-curvature norm")
        fig.tight_layout()
        path = os.path.join(outdir, "flow_trace.png")
        fig.savefig(path, dpi=120, metadata={"Date": None})
        plt.close(fig)
        figures.append(os.path.basename(path))
    decay = []
    if "torus_g2" in aggregate:
        rep = aggregate["torus_g2"]
        decay.append(("dual-form divergence", rep["sizes"],
                      [r["dstar_residual"] for r in rep["reports"]]))
    if "weierstrass" in aggregate:
        rep = aggregate["weierstrass"]
        ns = [r["n"] for r in rep["rows"]]
        decay.append(("surface mean curvature", ns,
                      [r["mean_curvature"] for r in rep["rows"]]))
        decay.append(("Gauss lift CR defect", ns, [r["cr"] for r in rep["rows"]]))
    if decay:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for label, ns, vals in decay:
            ax.loglog([1.0 / (n - 1) for n in ns], vals, "o-", label=label)
        ax.set_xlabel("grid step")
        ax.set_ylabel("max residual")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(outdir, "residual_decay.png")
        fig.savefig(path, dpi=120, metadata={"Date": None})
        plt.close(fig)
        figures.append(os.path.basename(path))
    payload = {
        "command": "report",
        "sources": names,
        "figures": figures,
        "pass": all(doc.get("pass", True) for doc in aggregate.values()),
    }
    _write_json(outdir, "report", payload)
    return EXIT_OK if payload["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; flags override its fields")
    sp.add_argument("--out", help="output directory (default: out)")
    sp.add_argument("--seed", type=int, help="random seed (default: 1)")
    sp.add_argument("--threads", type=int, help="parallelism cap (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="klfib",
        description="verification suites and solvers for positive-form geometry")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify-algebra", help="pointwise identity suites")
    sp.add_argument("--samples", type=int)
    _add_common(sp)
    sp.set_defaults(func=cmd_verify_algebra)

    sp = sub.add_parser("lattice-scan", help="enumerate -2 classes")
    sp.add_argument("--height", type=int)
    sp.add_argument("--blocks")
    sp.add_argument("--max-results", type=int, dest="max_results")
    _add_common(sp)
    sp.set_defaults(func=cmd_lattice_scan)

    sp = sub.add_parser("solve-maximal", help="flow a perturbed section to maximality")
    sp.add_argument("--n", type=int)
    sp.add_argument("--amplitude", type=float)
    sp.add_argument("--stop-mnorm", type=float, dest="stop_mnorm")
    sp.add_argument("--max-steps", type=int, dest="max_steps")
    sp.add_argument("--dt-safety", type=float, dest="dt_safety")
    _add_common(sp)
    sp.set_defaults(func=cmd_solve_maximal)

    sp = sub.add_parser("ma-bridge", help="Monge-Ampere / maximal-graph crosscheck")
    sp.add_argument("--n", type=int)
    _add_common(sp)
    sp.set_defaults(func=cmd_ma_bridge)

    sp = sub.add_parser("torus-g2", help="torus-fibre assembly torsion residuals")
    sp.add_argument("--sizes", type=int, nargs="+")
    _add_common(sp)
    sp.set_defaults(func=cmd_torus_g2)

    sp = sub.add_parser("weierstrass", help="isotropic-curve surface residuals")
    sp.add_argument("--sizes", type=int, nargs="+")
    _add_common(sp)
    sp.set_defaults(func=cmd_weierstrass)

    sp = sub.add_parser("gradient-path", help="trace a class gradient path")
    sp.add_argument("--n", type=int)
    sp.add_argument("--start", type=float, nargs=3)
    sp.add_argument("--klass", type=float, nargs="+",
                    help="tracked class vector (length 6)")
    sp.add_argument("--step", type=float)
    sp.add_argument("--max-steps", type=int, dest="max_steps")
    _add_common(sp)
    sp.set_defaults(func=cmd_gradient_path)

    sp = sub.add_parser("report", help="aggregate artifacts into CSV and figures")
    _add_common(sp)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (exterior.NotPositiveError, sections.NonPositiveSectionError,
            hyper.SingularTripleError, curvature.FrameDegeneracyError,
            bridges.NonPositiveGaussLiftError) as e:
        print(f"numeric failure ({_ERROR_CODES.get(type(e).__name__)}): {e}",
              file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
