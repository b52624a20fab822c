"""Gradient paths of tracked classes and endpoint matching."""

from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.interpolate import RegularGridInterpolator

from klfib.lattice import LatticeVector, ReflectionDatum
from klfib.paths import (
    MonodromyAtlas,
    PathParams,
    PathPolyline,
    gradient_field_of_class,
    gradient_path,
    matching_check,
    transverse_hessian,
)
from klfib.sections import SectionGrid, SignatureSpace


def curved_section(n=33):
    """Graph of a convex potential into the split space; positive everywhere."""
    space = SignatureSpace.split3()

    def f(t1, t2, t3):
        base = np.stack([t1, t2, t3], axis=-1)
        grad = np.stack([t1 + 0.2 * t2 * t3, t2 + 0.1 * t1, t3], axis=-1)
        return np.concatenate([base, grad], axis=-1)

    return SectionGrid.from_function(f, (n, n, n), 1.0 / (n - 1), space)


def test_params_validation():
    with pytest.raises(ValueError):
        PathParams(step=0.0)
    with pytest.raises(ValueError):
        PathParams(max_steps=0)


def test_gradient_field_of_linear_class():
    h = curved_section()
    # hyperbolic pairing: the first dual slot picks the first gradient slot,
    # so f = <c, h> = t1 + 0.2 t2 t3
    c = np.array([1.0, 0, 0, 0, 0, 0])
    V, gradf = gradient_field_of_class(h, c)
    assert np.abs(gradf[5, 7, 9] - np.array(
        [1.0, 0.2 * 9 / 32, 0.2 * 7 / 32])).max() < 1e-10


def test_gradient_path_ascends_and_stops():
    h = curved_section()
    c = np.array([0, 0, 0, 1.0, 0.3, 0])
    p = gradient_path(h, c, (0.5, 0.5, 0.5), PathParams(step=0.02))
    assert p.stop_reason in ("boundary", "gradient_tolerance", "step_cap")
    assert np.all(np.diff(p.profile) > 0)
    assert p.nodes.shape[1] == 3


def test_gradient_path_matches_reference_integrator():
    h = curved_section()
    c = np.array([0, 0, 0, 1.0, 0, 0])
    p = gradient_path(h, c, (0.4, 0.45, 0.5), PathParams(step=0.01))
    V, _ = gradient_field_of_class(h, c)
    interp = RegularGridInterpolator(h.axes(), V)

    def rhs(_, x):
        return interp(np.clip(x, 0.0, 1.0))[0]

    k = min(len(p.nodes) - 2, 40)  # skip the clipped final node
    sol = solve_ivp(rhs, (0.0, 0.01 * k), np.array([0.4, 0.45, 0.5]),
                    dense_output=True, rtol=1e-10, atol=1e-12)
    assert np.abs(p.nodes[k] - sol.sol(0.01 * k)).max() < 1e-6


def test_gradient_path_rejects_boundary_start():
    h = curved_section(9)
    with pytest.raises(ValueError):
        gradient_path(h, np.array([0, 0, 0, 1.0, 0, 0]), (0.0, 0.5, 0.5))


def test_gradient_path_class_length_guard():
    h = curved_section(9)
    with pytest.raises(ValueError):
        gradient_path(h, np.ones(5), (0.5, 0.5, 0.5))


def test_jsonl_roundtrip_fields():
    h = curved_section(9)
    p = gradient_path(h, np.array([0, 0, 0, 1.0, 0, 0]), (0.5, 0.5, 0.5),
                      PathParams(step=0.05, max_steps=5))
    lines = p.to_jsonl().strip().split("\n")
    head = json.loads(lines[0])
    assert head["stop_reason"] == p.stop_reason
    assert len(lines) == len(p.nodes) + 1
    row = json.loads(lines[1])
    assert row["t"] == [0.5, 0.5, 0.5]


def test_transverse_hessian_affine_profile_is_flat():
    h = curved_section()
    # class paired with the base coordinates only: f = t1 is affine
    c = np.array([0, 0, 0, 1.0, 0, 0])
    H = transverse_hessian(h, c, (0.5, 0.5, 0.5))
    assert np.abs(H).max() < 1e-8


def test_transverse_hessian_shape_and_symmetry():
    h = curved_section()
    c = np.array([0.2, 0, 0, 1.0, 0.3, 0])
    H = transverse_hessian(h, c, (0.45, 0.5, 0.55))
    assert H.shape == (2, 2)
    assert np.abs(H - H.T).max() < 1e-10


def test_matching_check_plain_agreement():
    root = LatticeVector.from_blocks(u=(1, -1, 0, 0, 0, 0))
    endA = ReflectionDatum(root)
    endB = ReflectionDatum(root)
    p = PathPolyline(np.zeros((2, 3)), root.array().astype(float),
                     np.array([0.0, 1.0]), "boundary")
    ok, report = matching_check(p, endA, endB)
    assert ok
    assert report["transported"] == report["expected"]


def test_matching_check_wall_transport():
    delta = LatticeVector.from_blocks(u=(1, -1, 0, 0, 0, 0))
    wall_root = LatticeVector.from_blocks(u=(0, 0, 1, -1, 0, 0))
    wall = ReflectionDatum(wall_root)
    from klfib.lattice import reflect
    image = reflect(ReflectionDatum(wall_root, 0.0), delta)
    endA = ReflectionDatum(delta)
    endB = ReflectionDatum(image)
    p = PathPolyline(np.zeros((2, 3)), delta.array().astype(float),
                     np.array([0.0, 1.0]), "boundary")
    ok, _ = matching_check(p, endA, endB, walls=(wall,))
    assert ok
    # without the wall the endpoints may or may not differ; here they do not
    ok_plain, _ = matching_check(p, endA, endB)
    assert ok_plain == (image.coords == delta.coords)


def test_matching_check_tracked_class_mismatch():
    delta = LatticeVector.from_blocks(u=(1, -1, 0, 0, 0, 0))
    other = LatticeVector.from_blocks(u=(0, 0, 1, -1, 0, 0))
    endA = ReflectionDatum(delta)
    endB = ReflectionDatum(delta)
    p = PathPolyline(np.zeros((2, 3)), other.array().astype(float),
                     np.array([0.0, 1.0]), "boundary")
    ok, report = matching_check(p, endA, endB)
    assert not ok and report.get("tracked_class_mismatch")


def test_monodromy_atlas_sequence():
    r1 = ReflectionDatum(LatticeVector.from_blocks(u=(1, -1, 0, 0, 0, 0)))
    r2 = ReflectionDatum(LatticeVector.from_blocks(u=(0, 0, 1, -1, 0, 0)))
    atlas = MonodromyAtlas({"a": r1, "b": r2})
    assert atlas.sequence(("b", "a")) == (r2, r1)
