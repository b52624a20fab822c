"""Verification bridges: potential graphs, torus-fibre assembly, maximal surfaces.

Three independent cross-checks of the section machinery:

* Graphs of gradients.  A potential F on the 3-box gives the section
  h(t) = (t, grad F) into the split space R^3 + (R^3)^*; h is maximal exactly
  when F satisfies the constant-determinant equation det Hess F = C.

* Torus assembly.  From the same potential, per-node triples
  omega_i = beta_i + sum_j Hess_ij gamma_j on a 4-torus fibre assemble a
  positive 3-form on 7-space; its closedness residual vanishes by symmetry of
  the discrete Hessian and its co-closedness residual measures the deviation
  from the constant-determinant equation.

* Weierstrass surfaces.  An exactly isotropic polynomial curve integrates to a
  maximal surface in R^{2,q}; the surface's discrete 2-d mean curvature and
  the holomorphicity of its Gauss lift are second-order residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import AltForm
from .hyper import HyperTriple
from .sections import (
    SectionGrid,
    SignatureSpace,
    grid_gradients,
    grid_mean_curvature,
    grid_metric,
)


def deep_interior(shape, margin: int = 2):
    """Index slices at least ``margin`` nodes from every boundary face.

    Nodes one layer from the boundary mix one-sided and central stencils, so
    pointwise residual checks are taken on this subregion.
    """
    return tuple(slice(margin, n - margin) for n in shape)


def core_box(shape, frac: float = 0.25):
    """Index slices of the central box, ``frac`` of the span from each face.

    Convergence-order measurements use a fixed physical subdomain: near the
    boundary the truncation error of composed difference stencils decays one
    order slower, so a fixed node margin does not expose the interior order.
    """
    return tuple(slice(int(np.ceil(frac * (n - 1))),
                       int(np.floor((1 - frac) * (n - 1))) + 1) for n in shape)


@dataclass(frozen=True)
class ScalarGrid:
    """Scalar potential F sampled on a uniform 3-grid."""

    values: np.ndarray
    hstep: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or min(v.shape) < 3:
            raise ValueError("need a 3-d grid with at least 3 nodes per axis")
        if not np.all(np.isfinite(v)) or self.hstep <= 0:
            raise ValueError("invalid scalar grid")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @staticmethod
    def from_function(f, shape, hstep: float) -> "ScalarGrid":
        ax = [np.arange(n) * hstep for n in shape]
        T = np.meshgrid(*ax, indexing="ij")
        return ScalarGrid(np.asarray(f(*T), dtype=float), hstep)

    def gradient(self) -> np.ndarray:
        """(n1,n2,n3,3) array of first derivatives, second-order stencils."""
        return np.stack(
            [np.gradient(self.values, self.hstep, axis=i, edge_order=2)
             for i in range(3)], axis=-1)

    def hessian(self) -> np.ndarray:
        """(n1,n2,n3,3,3) array of second derivatives; symmetric exactly
        because the difference operators along distinct axes commute."""
        grad = self.gradient()
        return np.stack(
            [np.gradient(grad, self.hstep, axis=i, edge_order=2)
             for i in range(3)], axis=-2)


def graph_section(F: ScalarGrid) -> SectionGrid:
    """h(t) = (t, grad F(t)) into the split signature-(3,3) space."""
    ax = [np.arange(n) * F.hstep for n in F.shape]
    T = np.meshgrid(*ax, indexing="ij")
    vals = np.concatenate([np.stack(T, axis=-1), F.gradient()], axis=-1)
    return SectionGrid(vals, F.hstep, SignatureSpace.split3())


def ma_residual(F: ScalarGrid, C: float) -> np.ndarray:
    """det(discrete Hessian of F) - C per node."""
    return np.linalg.det(F.hessian()) - C


def ma_maximal_crosscheck(F: ScalarGrid, C: float):
    """(max |det Hess - C|, max ||m_perp|| of the graph section).

    The bridge claim: both vanish together at discretization order.
    """
    h = graph_section(F)
    m = grid_mean_curvature(h.values, h.hstep, h.space.matrix)
    mnorm = float(np.sqrt((m ** 2).sum(axis=-1)).max())
    return float(np.abs(ma_residual(F, C)).max()), mnorm


# fibre 2-form bases: beta_i = dx0 ^ dxi, gamma_i = dxj ^ dxk (cyclic), chosen
# so the unit Hessian reproduces the standard self-dual triple.
_BETA = tuple(AltForm.from_assignment(4, 2, {(0, i): 1.0}) for i in (1, 2, 3))
_GAMMA = tuple(AltForm.from_assignment(4, 2, {(j, k): 1.0})
               for j, k in ((2, 3), (3, 1), (1, 2)))


def node_triple(H: np.ndarray) -> HyperTriple:
    """The fibre triple omega_i = beta_i + sum_j H_ij gamma_j for a Hessian H."""
    return HyperTriple(tuple(
        AltForm(4, 2, _BETA[i].coeffs + sum(H[i, j] * _GAMMA[j].coeffs
                                            for j in range(3)))
        for i in range(3)))


def _wedge6() -> np.ndarray:
    """6x6 pairing of 2-form coefficient vectors: (a ^ b) / dx0123."""
    from .exterior import wedge as _w
    basis = [AltForm(4, 2, row) for row in np.eye(6)]
    return np.array([[_w(a, b).coeffs[0] for b in basis] for a in basis])


_W6 = _wedge6()
_B_STACK = np.array([b.coeffs for b in _BETA])
_G_STACK = np.array([g.coeffs for g in _GAMMA])


@dataclass(frozen=True)
class TorusReport:
    """Torsion residuals of the assembled 3-form over the grid."""

    dphi_residual: float
    dstar_residual: float
    lam_range: tuple
    shape: tuple
    hstep: float

    def to_json(self) -> dict:
        return {
            "dphi_residual": self.dphi_residual,
            "dstar_residual": self.dstar_residual,
            "lam_range": list(self.lam_range),
            "shape": list(self.shape),
            "hstep": self.hstep,
        }


def torus_g2_assemble(F: ScalarGrid) -> TorusReport:
    """Assemble the fibre-constant 3-form family from F and report torsion.

    Per node the triple is omega_i = beta_i + Hess_ij gamma_j and the volume
    coefficient lam is fixed by requiring the fibre volume of the dual 4-form
    to be 1, which makes the (4,0) part constant so the co-closedness residual
    reduces to the divergence of the Theta forms.

    Residuals: (a) closedness = max antisymmetrized base-derivative mismatch
    of the triple (zero up to roundoff by Hessian symmetry); (b) co-closedness
    = max norm of sum_i dTheta_i/dt_i by central differences, measured on the
    central half-box (see :func:`core_box`).
    """
    Hess = F.hessian()
    n1, n2, n3 = F.shape
    # batched over nodes: omega coefficients, wedge Gram, dual-form coefficients
    W = _B_STACK + np.einsum("...ij,ja->...ia", Hess, _G_STACK)
    A = np.einsum("...ia,ab,...jb->...ij", W, _W6, W)
    ev = np.linalg.eigvalsh(A)
    if ev[..., 0].min() <= 0:
        bad = tuple(np.argwhere(ev[..., 0] <= 0)[0])
        raise ValueError(f"triple not hypersymplectic at node {bad} "
                         f"(margin {ev[..., 0].min():.3e})")
    detA = np.linalg.det(A)
    # fibre-volume-1 normalization: (1/2) det(A)^{1/3} lam^{-2/3} = 1
    lam_grid = detA ** 0.5 / 2.0 ** 1.5
    coef = -(lam_grid ** (1.0 / 3.0) * detA ** (1.0 / 3.0))
    theta = np.einsum("...,...ij,...ja->...ia", coef, np.linalg.inv(A), W)
    # closedness: d(omega_i)/dt_j antisymmetrized = third-derivative symmetry
    dH = np.stack([np.gradient(Hess, F.hstep, axis=i, edge_order=2)
                   for i in range(3)], axis=-3)  # (..., l, i, j): d_l H_ij
    dphi = 0.0
    for l in range(3):
        for i in range(l + 1, 3):
            dphi = max(dphi, float(np.abs(dH[..., l, i, :] - dH[..., i, l, :]).max()))
    # co-closedness: divergence of Theta over the base, deep interior
    div = np.zeros((n1, n2, n3, 6))
    for i in range(3):
        div += np.gradient(theta[..., i, :], F.hstep, axis=i, edge_order=2)
    core = core_box(F.shape)
    dstar = float(np.abs(div[core]).max())
    return TorusReport(dphi, dstar, (float(lam_grid.min()), float(lam_grid.max())),
                       F.shape, F.hstep)


# ---------------------------------------------------------------------------
# Weierstrass surfaces in R^{2,q}
# ---------------------------------------------------------------------------

def _poly_mul(a, b):
    return np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class IsotropicCurve:
    """Polynomial curve f: C -> C^{2+q} with Q(f) = 0 identically.

    Q is the complexified pairing x0^2 + x1^2 - sum x_j^2.  Isotropy is exact
    on the coefficients, checked by :func:`isotropy_residual`.
    """

    q: int
    polys: tuple  # q+2 coefficient arrays, ascending powers of z

    def __post_init__(self):
        if len(self.polys) != self.q + 2:
            raise ValueError("need q+2 component polynomials")
        object.__setattr__(self, "polys",
                           tuple(np.asarray(p, dtype=complex) for p in self.polys))

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0] * 2 + [-1.0] * self.q)

    def space(self) -> SignatureSpace:
        return SignatureSpace.diagonal(2, self.q)

    def scaled(self, c: complex) -> "IsotropicCurve":
        return IsotropicCurve(self.q, tuple(c * p for p in self.polys))

    def to_json(self) -> dict:
        return {"q": self.q,
                "polys": [[[float(z.real), float(z.imag)] for z in p] for p in self.polys]}

    @staticmethod
    def from_json(obj) -> "IsotropicCurve":
        return IsotropicCurve(int(obj["q"]),
                              tuple(np.array([complex(re, im) for re, im in p])
                                    for p in obj["polys"]))

    @staticmethod
    def q1_standard() -> "IsotropicCurve":
        """f = (1 + z^2, i (1 - z^2), 2z), the basic q = 1 example."""
        return IsotropicCurve(1, (np.array([1, 0, 1], dtype=complex),
                                  np.array([1j, 0, -1j]),
                                  np.array([0, 2], dtype=complex)))


def isotropy_residual(c: IsotropicCurve) -> float:
    """Max coefficient magnitude of the polynomial Q(f(z))."""
    maxlen = 2 * max(len(p) for p in c.polys) - 1
    acc = np.zeros(maxlen, dtype=complex)
    for sign, p in zip(c.signs, c.polys):
        sq = _poly_mul(p, p)
        acc[:len(sq)] += sign * sq
    return float(np.abs(acc).max())


@dataclass(frozen=True)
class SurfaceGrid:
    """Sampled map from a uniform 2-grid into R^{2,q}."""

    values: np.ndarray  # (n1, n2, dim)
    hstep: float
    space: SignatureSpace

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[2] != self.space.dim or min(v.shape[:2]) < 3:
            raise ValueError("values must be (n1, n2, dim) with n >= 3")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape[:2]


class NonPositiveGaussLiftError(ValueError):
    def __init__(self, msg, nodes=None):
        super().__init__(msg)
        self.nodes = nodes or []


def weierstrass(c: IsotropicCurve, origin=(-0.5, -0.5), size=1.0,
                shape=(17, 17)) -> SurfaceGrid:
    """Integrate the curve and sample X = Re H on a square grid.

    H is the exact term-by-term antiderivative (constant 0); the tangent
    plane is required to be positive at every node.
    """
    if isotropy_residual(c) != 0.0:
        raise ValueError("curve is not exactly isotropic")
    if shape[0] != shape[1]:
        raise ValueError("square grids only")
    hstep = size / (shape[0] - 1)
    u = origin[0] + np.arange(shape[0]) * hstep
    v = origin[1] + np.arange(shape[1]) * hstep
    z = u[:, None] + 1j * v[None, :]
    vals = np.empty(shape + (c.q + 2,))
    for a, p in enumerate(c.polys):
        anti = np.concatenate([[0.0], np.asarray(p) / np.arange(1, len(p) + 1)])
        vals[..., a] = np.polynomial.polynomial.polyval(z, anti).real
    s = SurfaceGrid(vals, hstep, c.space())
    _, g, _ = grid_metric(s.values, s.hstep, s.space.matrix)
    ev = np.linalg.eigvalsh(g)
    bad = np.argwhere(ev[..., 0] <= 0)
    if len(bad):
        raise NonPositiveGaussLiftError(
            f"tangent plane not positive at {len(bad)} nodes",
            [tuple(n) for n in bad[:20]])
    return s


def surface_mean_curvature(s: SurfaceGrid) -> np.ndarray:
    """Normal-projected 2-d mean curvature field (zero on the boundary)."""
    return grid_mean_curvature(s.values, s.hstep, s.space.matrix)


def gauss_map(s: SurfaceGrid):
    """Orthonormal tangent frames and their quadric residual per node.

    Returns (e1, e2, quadric_residual) where the frames are pairing-
    orthonormalized tangent fields and the residual is
    max(| |e1|^2 - |e2|^2 |, 2 |<e1, e2>|), the defect of the complexified
    null condition Q(e1 + i e2) = 0.
    """
    P = s.space.matrix
    dh = grid_gradients(s.values, s.hstep)
    xu, xv = dh[..., 0, :], dh[..., 1, :]
    n11 = np.einsum("...a,ab,...b->...", xu, P, xu)
    if n11.min() <= 0:
        raise NonPositiveGaussLiftError("tangent frame not positive")
    e1 = xu / np.sqrt(n11)[..., None]
    c = np.einsum("...a,ab,...b->...", e1, P, xv)
    w = xv - c[..., None] * e1
    n22 = np.einsum("...a,ab,...b->...", w, P, w)
    if n22.min() <= 0:
        raise NonPositiveGaussLiftError("tangent frame not positive")
    e2 = w / np.sqrt(n22)[..., None]
    q11 = np.einsum("...a,ab,...b->...", e1, P, e1)
    q22 = np.einsum("...a,ab,...b->...", e2, P, e2)
    q12 = np.einsum("...a,ab,...b->...", e1, P, e2)
    residual = float(max(np.abs(q11 - q22).max(), 2 * np.abs(q12).max()))
    return e1, e2, residual


def gauss_cr_residual(s: SurfaceGrid) -> float:
    """Discrete Cauchy-Riemann defect of the Gauss lift, gauge-invariant.

    The lift W = e1 - i e2 represents the Gauss map up to a complex scalar
    gauge (the sign on e2 matches the orientation the Weierstrass sampling
    induces); holomorphicity means the antiholomorphic derivative of W lies
    in the complex span of W.  The residual removes that component
    (projection in the pairing-Hermitian product, under which W has positive
    norm) and takes the max coefficient norm over the central half-box.
    """
    e1, e2, _ = gauss_map(s)
    W = e1 - 1j * e2
    P = s.space.matrix
    Wu = np.gradient(W, s.hstep, axis=0, edge_order=2)
    Wv = np.gradient(W, s.hstep, axis=1, edge_order=2)
    D = Wu + 1j * Wv  # antiholomorphic derivative (up to the factor 1/2)
    herm = np.einsum("...a,ab,...b->...", D, P, W.conj())
    norm = np.einsum("...a,ab,...b->...", W, P, W.conj())
    R = D - (herm / norm)[..., None] * W
    core = core_box(s.shape)
    return float(np.abs(R[core]).max())
