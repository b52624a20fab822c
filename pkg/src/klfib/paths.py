"""Gradient paths of t -> c.h(t) in the section-induced metric, and matching.

For a positive section h and a tracked lattice class c, the candidate curves
are integral curves of the gradient of f(t) = <c, h(t)> with respect to the
induced metric g, i.e. t' = g^{-1} grad f, integrated with fixed-step RK4 on
trilinearly interpolated node fields.  Paths stop at the box boundary, when
the gradient norm falls below a tolerance, or at a step cap.

A matching check compares the vanishing-cycle classes at the two endpoints
after transporting one of them through any declared monodromy walls crossed
along the way (each wall acts by its root reflection).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .lattice import LatticeVector, ReflectionDatum, reflect
from .sections import SectionGrid, grid_metric


@dataclass(frozen=True)
class PathParams:
    step: float = 0.01  # RK4 step in flow time
    grad_tol: float = 1e-8
    max_steps: int = 10_000

    def __post_init__(self):
        if self.step <= 0 or self.grad_tol < 0 or self.max_steps < 1:
            raise ValueError("invalid path parameters")


@dataclass(frozen=True)
class PathPolyline:
    """Traced path: node coordinates, the tracked class, and the f-profile."""

    nodes: np.ndarray  # (k, 3)
    c: np.ndarray  # tracked class, length = target dimension
    profile: np.ndarray  # f = <c, h> along the nodes
    stop_reason: str

    def to_jsonl(self) -> str:
        lines = []
        for node, val in zip(self.nodes, self.profile):
            lines.append(json.dumps({"t": [float(x) for x in node], "f": float(val)}))
        head = json.dumps({"c": [float(x) for x in self.c],
                           "stop_reason": self.stop_reason})
        return "\n".join([head] + lines) + "\n"


@dataclass(frozen=True)
class MonodromyAtlas:
    """Named reflection data for declared monodromy walls (input data only)."""

    walls: dict = field(default_factory=dict)  # name -> ReflectionDatum

    def sequence(self, names) -> tuple:
        return tuple(self.walls[n] for n in names)


def _class_vector(c, dim: int) -> np.ndarray:
    if isinstance(c, LatticeVector):
        return c.array().astype(float)
    c = np.asarray(c, dtype=float)
    if c.shape != (dim,):
        raise ValueError("class vector has wrong length")
    return c


def gradient_field_of_class(h: SectionGrid, c) -> tuple:
    """(V, gradf): the metric gradient field g^{-1} grad <c,h> and the raw grad."""
    cv = _class_vector(c, h.space.dim)
    f = np.einsum("...a,ab,b->...", h.values, h.space.matrix, cv)
    gradf = np.stack([np.gradient(f, h.hstep, axis=i, edge_order=2)
                      for i in range(3)], axis=-1)
    _, g, J = grid_metric(h.values, h.hstep, h.space.matrix)
    if J.min() <= 0:
        raise ValueError("section not positive; gradient field undefined")
    V = np.einsum("...ij,...j->...i", np.linalg.inv(g), gradf)
    return V, gradf


def gradient_path(h: SectionGrid, c, start, params: PathParams = PathParams()) -> PathPolyline:
    """Trace the ascending gradient path of <c, h> from an interior start point."""
    cv = _class_vector(c, h.space.dim)
    V, gradf = gradient_field_of_class(h, cv)
    ax = h.axes()
    lo = np.array([a[0] for a in ax])
    hi = np.array([a[-1] for a in ax])
    interp_V = RegularGridInterpolator(ax, V, bounds_error=True)
    interp_g = RegularGridInterpolator(ax, gradf, bounds_error=True)
    f_interp = RegularGridInterpolator(
        ax, np.einsum("...a,ab,b->...", h.values, h.space.matrix, cv),
        bounds_error=True)
    t = np.asarray(start, dtype=float)
    if np.any(t <= lo) or np.any(t >= hi):
        raise ValueError("start point must be interior")
    nodes = [t.copy()]
    profile = [float(f_interp(t)[0])]
    reason = "step_cap"
    dt = params.step
    for _ in range(params.max_steps):
        if np.linalg.norm(interp_g(t)[0]) <= params.grad_tol:
            reason = "gradient_tolerance"
            break

        def rhs(x):
            return interp_V(np.clip(x, lo, hi))[0]

        k1 = rhs(t)
        k2 = rhs(t + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt * k2)
        k4 = rhs(t + dt * k3)
        t_new = t + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(t_new <= lo) or np.any(t_new >= hi):
            t = np.clip(t_new, lo, hi)
            nodes.append(t.copy())
            profile.append(float(f_interp(t)[0]))
            reason = "boundary"
            break
        t = t_new
        nodes.append(t.copy())
        profile.append(float(f_interp(t)[0]))
    return PathPolyline(np.array(nodes), cv, np.array(profile), reason)


def transverse_hessian(h: SectionGrid, c, point) -> np.ndarray:
    """Hessian of <c, h> at a point, projected transverse to its gradient flow.

    Diagnostic for endpoint nondegeneracy: eigenvalues of the 2x2 block of
    the Hessian on the plane g-orthogonal to the gradient direction.
    """
    cv = _class_vector(c, h.space.dim)
    point = np.asarray(point, dtype=float)
    f = np.einsum("...a,ab,b->...", h.values, h.space.matrix, cv)
    grad = np.stack([np.gradient(f, h.hstep, axis=i, edge_order=2)
                     for i in range(3)], axis=-1)
    hess = np.stack([np.gradient(grad, h.hstep, axis=i, edge_order=2)
                     for i in range(3)], axis=-2)
    ax = h.axes()
    Hp = RegularGridInterpolator(ax, hess)(point)[0]
    gp = RegularGridInterpolator(ax, grad)(point)[0]
    _, g, _ = grid_metric(h.values, h.hstep, h.space.matrix)
    gmat = RegularGridInterpolator(ax, g)(point)[0]
    norm = gp @ np.linalg.solve(gmat, gp)
    if norm <= 0:
        return Hp  # critical point: everything is transverse
    # g-orthonormal basis of the transverse plane
    w = np.linalg.solve(gmat, gp) / np.sqrt(norm)
    basis = []
    for e in np.eye(3):
        u = e - (e @ gmat @ w) * w
        for b in basis:
            u = u - (u @ gmat @ b) * b
        n2 = u @ gmat @ u
        if n2 > 1e-12:
            basis.append(u / np.sqrt(n2))
        if len(basis) == 2:
            break
    B = np.array(basis)
    return B @ Hp @ B.T


def matching_check(p: PathPolyline, endA: ReflectionDatum, endB: ReflectionDatum,
                   walls=()):
    """Do the endpoint vanishing cycles agree after wall transport?

    The class of endA is pushed through the declared walls (in crossing
    order, each acting by its linear reflection) and compared with endB's
    class; the tracked class of the path must equal endA's class.  Returns
    (bool, report).
    """
    report = {}
    if not np.array_equal(p.c, endA.delta.array().astype(float)):
        report["tracked_class_mismatch"] = True
        return False, report
    transported = endA.delta
    for wall in walls:
        transported = reflect(ReflectionDatum(wall.delta, 0.0), transported)
    report["transported"] = list(transported.coords)
    report["expected"] = list(endB.delta.coords)
    return transported.coords == endB.delta.coords, report
