"""Discrete positive sections: 3-box grids mapping into a signature-(3,q) space.

A section is sampled on a uniform grid over [0, (n-1)*hstep]^3 with Dirichlet
boundary values.  Derivatives use second-order finite differences (central in
the interior, one-sided at the boundary), which are exact on quadratics.  From
the derivatives come the induced metric g_ij = <d_i h, d_j h>, its determinant
J, the 3-volume, and the mean curvature in divergence form

    m = J^{-1/2} d_i ( J^{1/2} g^{ij} d_j h ),

projected onto the normal space of the image.  Positivity (g > 0 at every
node) is the standing requirement for all of these.

Lattice-aware diagnostics: enumeration of -2 classes orthogonal to the
derivative frame per node, and the local jet validator for branched sections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import lattice

_trapz = getattr(np, "trapezoid", None) or np.trapz


class NonPositiveSectionError(ValueError):
    """Induced metric fails positive definiteness somewhere."""

    def __init__(self, msg, nodes=None):
        super().__init__(msg)
        self.nodes = nodes or []


@dataclass(frozen=True)
class SignatureSpace:
    """R^{p,q} with a fixed symmetric pairing of signature (p, q)."""

    p: int
    q: int
    matrix: np.ndarray
    kind: str = "diagonal"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.p + self.q, self.p + self.q):
            raise ValueError("pairing matrix has wrong shape")
        ev = np.linalg.eigvalsh(m)
        if (ev > 0).sum() != self.p or (ev < 0).sum() != self.q:
            raise ValueError(f"pairing does not have signature ({self.p},{self.q})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.p + self.q

    @staticmethod
    def diagonal(p: int, q: int) -> "SignatureSpace":
        return SignatureSpace(p, q, np.diag([1.0] * p + [-1.0] * q), "diagonal")

    @staticmethod
    def k3() -> "SignatureSpace":
        """The rank-22 lattice pairing, signature (3,19)."""
        return SignatureSpace(3, 19, np.asarray(lattice.gram(), dtype=float), "k3")

    @staticmethod
    def split3() -> "SignatureSpace":
        """R^3 + dual R^3 with the hyperbolic pairing <(u,v),(u',v')> = u.v' + u'.v."""
        m = np.zeros((6, 6))
        m[:3, 3:] = np.eye(3)
        m[3:, :3] = np.eye(3)
        return SignatureSpace(3, 3, m, "split3")

    def pair(self, a, b):
        """Pairing of value arrays along their last axis."""
        return np.einsum("...i,ij,...j->...", a, self.matrix, b)

    def header(self) -> dict:
        h = {"p": self.p, "q": self.q, "kind": self.kind}
        if self.kind == "matrix":
            h["matrix"] = self.matrix.tolist()
        return h

    @staticmethod
    def from_header(h: dict) -> "SignatureSpace":
        kind = h.get("kind", "diagonal")
        if kind == "diagonal":
            return SignatureSpace.diagonal(h["p"], h["q"])
        if kind == "k3":
            return SignatureSpace.k3()
        if kind == "split3":
            return SignatureSpace.split3()
        return SignatureSpace(h["p"], h["q"], np.array(h["matrix"], dtype=float), "matrix")


@dataclass(frozen=True)
class SectionGrid:
    """Map h from a uniform 3-grid into a SignatureSpace; Dirichlet boundary."""

    values: np.ndarray  # (n1, n2, n3, dim)
    hstep: float
    space: SignatureSpace

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 4 or v.shape[3] != self.space.dim:
            raise ValueError("values must have shape (n1, n2, n3, space dim)")
        if min(v.shape[:3]) < 3:
            raise ValueError("need at least 3 nodes per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite section values")
        if self.hstep <= 0:
            raise ValueError("hstep must be positive")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape[:3]

    def axes(self):
        return tuple(np.arange(n) * self.hstep for n in self.shape)

    @staticmethod
    def from_function(f, shape, hstep: float, space: SignatureSpace) -> "SectionGrid":
        """Sample h(t) = f(t1, t2, t3) on the grid."""
        ax = [np.arange(n) * hstep for n in shape]
        T = np.meshgrid(*ax, indexing="ij")
        vals = np.asarray(f(*T))
        if vals.shape != tuple(shape) + (space.dim,):
            raise ValueError("sampled values have wrong shape")
        return SectionGrid(vals, hstep, space)

    def with_values(self, values: np.ndarray) -> "SectionGrid":
        return SectionGrid(values, self.hstep, self.space)

    def interior(self):
        return (slice(1, -1),) * 3

    # -- serialization: JSON header + CSV or little-endian binary block ----
    def save(self, basepath: str, fmt: str = "csv"):
        if fmt not in ("csv", "bin"):
            raise ValueError("fmt must be 'csv' or 'bin'")
        block = f"{basepath}.values.{fmt}"
        header = {
            "shape": list(self.shape),
            "hstep": self.hstep,
            "signature": self.space.header(),
            "values_file": block,
            "format": fmt,
            "byte_order": "little-endian float64, C order" if fmt == "bin" else None,
        }
        with open(f"{basepath}.json", "w") as fh:
            json.dump(header, fh, indent=1, sort_keys=True)
            fh.write("\n")
        flat = self.values.reshape(-1, self.space.dim)
        if fmt == "csv":
            np.savetxt(block, flat, delimiter=",")
        else:
            flat.astype("<f8").tofile(block)

    @staticmethod
    def load(basepath: str) -> "SectionGrid":
        with open(f"{basepath}.json") as fh:
            header = json.load(fh)
        space = SignatureSpace.from_header(header["signature"])
        shape = tuple(header["shape"])
        if header["format"] == "csv":
            flat = np.loadtxt(header["values_file"], delimiter=",")
        else:
            flat = np.fromfile(header["values_file"], dtype="<f8").reshape(-1, space.dim)
        return SectionGrid(flat.reshape(shape + (space.dim,)), header["hstep"], space)


# -- generic grid kernels (base dimension = values.ndim - 1) ---------------

def grid_gradients(values: np.ndarray, hstep: float) -> np.ndarray:
    """All base-direction derivative fields, shape (*grid, base, dim).

    Second-order stencils everywhere (central interior, one-sided boundary).
    """
    base = values.ndim - 1
    return np.stack(
        [np.gradient(values, hstep, axis=i, edge_order=2) for i in range(base)],
        axis=-2)


def grid_metric(values: np.ndarray, hstep: float, pairing: np.ndarray):
    """(dh, g, J) for a sampled map from a base-dim grid into (R^n, pairing)."""
    dh = grid_gradients(values, hstep)
    g = np.einsum("...ia,ab,...jb->...ij", dh, pairing, dh)
    return dh, g, np.linalg.det(g)


def grid_mean_curvature(values: np.ndarray, hstep: float, pairing: np.ndarray,
                        dh=None, g=None, J=None) -> np.ndarray:
    """Normal-projected mean curvature of a grid map; zero on boundary nodes."""
    if dh is None:
        dh, g, J = grid_metric(values, hstep, pairing)
    base = values.ndim - 1
    ginv = np.linalg.inv(g)
    sqJ = np.sqrt(J)
    flux = np.einsum("...,...ij,...ja->...ia", sqJ, ginv, dh)
    div = np.zeros_like(values)
    for i in range(base):
        div += np.gradient(flux[..., i, :], hstep, axis=i, edge_order=2)
    m = div / sqJ[..., None]
    coeff = np.einsum("...a,ab,...kb->...k", m, pairing, dh)
    m_perp = m - np.einsum("...kl,...k,...la->...a", ginv, coeff, dh)
    out = np.zeros_like(m_perp)
    inner = (slice(1, -1),) * base
    out[inner] = m_perp[inner]
    return out


def gradient_field(h: SectionGrid) -> np.ndarray:
    """All three partial derivative fields, shape (n1,n2,n3,3,dim)."""
    return grid_gradients(h.values, h.hstep)


def derivatives(h: SectionGrid, node):
    """The three derivative vectors of h at an interior node."""
    i, j, k = node
    for idx, n in zip((i, j, k), h.shape):
        if not 0 < idx < n - 1:
            raise ValueError(f"node {node} is not interior")
    v = h.values
    out = np.empty((3, h.space.dim))
    out[0] = (v[i + 1, j, k] - v[i - 1, j, k]) / (2 * h.hstep)
    out[1] = (v[i, j + 1, k] - v[i, j - 1, k]) / (2 * h.hstep)
    out[2] = (v[i, j, k + 1] - v[i, j, k - 1]) / (2 * h.hstep)
    return out


def induced_metric(h: SectionGrid, require_positive: bool = True):
    """(g, J): per-node 3x3 induced metric g_ij = <d_i h, d_j h> and det."""
    dh = gradient_field(h)
    g = np.einsum("...ia,ab,...jb->...ij", dh, h.space.matrix, dh)
    J = np.linalg.det(g)
    if require_positive:
        ev = np.linalg.eigvalsh(g)
        bad = np.argwhere(ev[..., 0] <= 0)
        if len(bad):
            raise NonPositiveSectionError(
                f"induced metric not positive definite at {len(bad)} nodes",
                [tuple(n) for n in bad[:20]])
    return g, J


def is_positive_section(h: SectionGrid):
    """Positivity of the induced metric; (bool, worst margin, offending nodes)."""
    g, _ = induced_metric(h, require_positive=False)
    ev = np.linalg.eigvalsh(g)
    margin = float(ev[..., 0].min())
    bad = [tuple(n) for n in np.argwhere(ev[..., 0] <= 0)[:20]]
    return margin > 0, margin, bad


def volume3(h: SectionGrid) -> float:
    """Trapezoidal quadrature of sqrt(J) over the grid box."""
    _, J = induced_metric(h)
    ax = h.axes()
    integrand = np.sqrt(J)
    for axis in (2, 1, 0):
        integrand = _trapz(integrand, ax[axis], axis=axis)
    return float(integrand)


def flow_state(h: SectionGrid):
    """One-pass diagnostics for flow stepping.

    Returns (m_perp, volume, margin) where margin is the smallest metric
    eigenvalue over all nodes; m_perp and volume are None when the section is
    not positive.
    """
    dh, g, J = grid_metric(h.values, h.hstep, h.space.matrix)
    margin = float(np.linalg.eigvalsh(g)[..., 0].min())
    if margin <= 0:
        return None, None, margin
    ax = h.axes()
    integrand = np.sqrt(J)
    for axis in (2, 1, 0):
        integrand = _trapz(integrand, ax[axis], axis=axis)
    m = grid_mean_curvature(h.values, h.hstep, h.space.matrix, dh, g, J)
    return m, float(integrand), margin


def mean_curvature(h: SectionGrid) -> np.ndarray:
    """Normal-projected mean curvature field m_perp; zero on boundary nodes.

    Divergence form m = J^{-1/2} d_i (J^{1/2} g^{ij} d_j h) with second-order
    differences, followed by pointwise projection orthogonal (in the target
    pairing) to the derivative frame: the continuous m is automatically
    normal, the discrete one only up to truncation error.
    """
    induced_metric(h)  # positivity gate with node report
    return grid_mean_curvature(h.values, h.hstep, h.space.matrix)


def max_mnorm(h: SectionGrid, m_perp: np.ndarray = None) -> float:
    """Max over nodes of the Euclidean norm of the mean curvature vector."""
    if m_perp is None:
        m_perp = mean_curvature(h)
    return float(np.sqrt((m_perp ** 2).sum(axis=-1)).max())


def perp_negativity(basis, space: SignatureSpace):
    """Is the pairing negative definite on the complement of a positive 3-frame?"""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape != (3, space.dim):
        raise ValueError("expected three vectors spanning a 3-plane")
    gb = B @ space.matrix @ B.T
    if np.linalg.eigvalsh(gb).min() <= 0:
        raise ValueError("basis does not span a positive 3-plane")
    # pairing-orthogonal complement = null space of B * pairing
    _, _, vt = np.linalg.svd(B @ space.matrix)
    comp = vt[3:]
    ev = np.linalg.eigvalsh(comp @ space.matrix @ comp.T)
    return bool(ev.max() < 0)


def avoids_minus_two(h: SectionGrid, height_bound: int, tol: float = 1e-8) -> dict:
    """Per interior node: -2 classes orthogonal to the derivative frame.

    Empty lists everywhere verify avoidance up to the height bound.  The
    section must map into the rank-22 lattice pairing.
    """
    if h.space.dim != 22:
        raise ValueError("avoidance scan needs a section into the rank-22 lattice space")
    report = {}
    n1, n2, n3 = h.shape
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            for k in range(1, n3 - 1):
                found = lattice.orthogonal_roots(derivatives(h, (i, j, k)),
                                                 height_bound, tol)
                report[(i, j, k)] = list(found.vectors)
    return report


@dataclass(frozen=True)
class BranchJet:
    """Local jet data at a branch point: frame (v0, v1, v2) and the root delta."""

    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    delta: lattice.LatticeVector

    def __post_init__(self):
        if lattice.pairing(self.delta, self.delta) != -2:
            raise ValueError("delta must have self-pairing -2")
        for v in (self.v0, self.v1, self.v2):
            if np.asarray(v).shape != (22,):
                raise ValueError("jet vectors live in the rank-22 space")

    def frame(self) -> np.ndarray:
        return np.array([self.v0, self.v1, self.v2], dtype=float)


def branched_check(j: BranchJet, height_bound: int, tol: float = 1e-8):
    """Validate the branch-point jet conditions; returns (bool, diagnostics).

    Checks (a) each v_i is pairing-orthogonal to delta within tol, (b) the
    frame spans a positive 3-plane, (c) the only -2 classes orthogonal to the
    frame at the height bound are +-delta.
    """
    B = j.frame()
    d = j.delta.array().astype(float)
    G = np.asarray(lattice.gram(), dtype=float)
    ortho = np.abs(B @ G @ d)
    diag = {"delta_orthogonality": float(ortho.max())}
    if ortho.max() > tol:
        return False, {**diag, "reason": "frame not orthogonal to delta"}
    gb = B @ G @ B.T
    ev = np.linalg.eigvalsh(gb)
    diag["frame_gram_eigs"] = ev.tolist()
    if ev.min() <= 0:
        return False, {**diag, "reason": "frame not a positive 3-plane"}
    found = lattice.orthogonal_roots(B, height_bound, tol)
    extra = [v for v in found.vectors
             if v.coords != j.delta.coords and v.coords != (-j.delta).coords]
    diag["orthogonal_roots"] = [v.coords for v in found.vectors]
    if extra:
        return False, {**diag, "reason": "excess -2 classes", "excess": [v.coords for v in extra]}
    if len(found.vectors) != 2:
        return False, {**diag, "reason": "delta not recovered by the scan"}
    return True, diag
