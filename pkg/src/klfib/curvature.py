"""Curvature verifiers for positive sections and self-dual 2-form data.

Three groups of tools live here.  For a positive section of a 3-box grid
into an indefinite space, second_fundamental_form and induced_ricci compute
the extrinsic curvature in orthonormal frames and assemble the Ricci tensor;
on maximal sections the Ricci eigenvalues are non-negative up to
discretization error, and gauss_derivative_ricci cross-checks this through
first differences of the tangent-plane projector.  On oriented 4-space,
cayley_trace_identity evaluates the trace of the quadratic map
q : Lambda^2_+ tensor Lambda^1 -> Lambda^2 tensor Lambda^2_+ against its
closed bilinear form, which is -sum t_i^2 on the kernel of the wedge
product.  Finally, validate_adiabatic_cayley and special_normalize check and
normalize vector-valued self-dual 2-form data on a 4-box grid: self-duality,
unitarity of Psi*Psi, closedness, and recovery of the conformal metric
determined by the image 3-plane in Lambda^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .exterior import AltForm, NotPositiveError, tuple_rank
from .hyper import CYCLIC, HyperTriple, conformal_structure
from .sections import NonPositiveSectionError, SectionGrid, grid_gradients


class FrameDegeneracyError(RuntimeError):
    """An orthonormal frame could not be extracted at some node."""

    def __init__(self, msg, nodes=None):
        super().__init__(msg)
        self.nodes = nodes


# 2-form component order on 4-space: lexicographic pairs
_PAIRS = tuple(combinations(range(4), 2))
_RANK2 = tuple_rank(4, 2)
# self-dual frame omega_k = dx0 dxk + dxl dxm, cyclic (k,l,m) in {1,2,3}
_OM = np.array([[1, 0, 0, 0, 0, 1],
                [0, 1, 0, 0, -1, 0],
                [0, 0, 1, 1, 0, 0]], dtype=float)
# anti-self-dual partners -dx0 dxk + dxl dxm
_OMB = np.array([[-1, 0, 0, 0, 0, 1],
                 [0, -1, 0, 0, -1, 0],
                 [0, 0, -1, 1, 0, 0]], dtype=float)


def _pairing_matrix(pairing) -> np.ndarray:
    m = getattr(pairing, "matrix", pairing)
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("pairing must be a square matrix or a SignatureSpace")
    return m


@dataclass(frozen=True)
class SecondFundamentalForm:
    """Extrinsic curvature of a positive section in orthonormal frames.

    S[..., a, i, j] is symmetric in the tangent indices i, j; the normal
    index a runs over a frame orthonormal for the negated pairing.  The
    tangent frame rows are orthonormal for the pairing itself.
    """

    S: np.ndarray  # (..., q, 3, 3)
    tangent: np.ndarray  # (..., 3, dim)
    normal: np.ndarray  # (..., q, dim)

    def trace(self) -> np.ndarray:
        """Mean-curvature components sum_j S^a_jj, shape (..., q)."""
        return np.einsum("...ajj->...a", self.S)


def _tangent_frames(dh: np.ndarray, Q: np.ndarray):
    """Orthonormalize the three derivative vectors; returns (tau, Linv).

    tau rows satisfy tau Q tau^T = I; Linv is the lower-triangular change of
    basis from coordinate derivatives to the frame.
    """
    g = np.einsum("...ia,ab,...jb->...ij", dh, Q, dh)
    if np.linalg.eigvalsh(g)[..., 0].min() <= 0:
        raise NonPositiveSectionError("section not positive: tangent frames undefined")
    L = np.linalg.cholesky(g)
    eye = np.broadcast_to(np.eye(3), L.shape)
    Linv = np.linalg.solve(L, eye)
    tau = np.einsum("...ai,...ib->...ab", Linv, dh)
    return tau, Linv


def _normal_frames(tau: np.ndarray, Q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Pivoted modified Gram-Schmidt frame for the normal spaces.

    Candidates are the standard basis vectors with their tangential parts
    removed; at each step the candidate of largest norm for the negated
    pairing is normalized and swept out of the rest.
    """
    dim = Q.shape[0]
    qn = dim - 3
    lead = tau.shape[:-2]
    proj = np.einsum("...ab,bc,dc->...ad", tau, Q, np.eye(dim))
    cand = np.broadcast_to(np.eye(dim), lead + (dim, dim)).copy()
    cand -= np.einsum("...ad,...ab->...db", proj, tau)
    frame = np.empty(lead + (qn, dim))
    for step in range(qn):
        norms = -np.einsum("...bi,ij,...bj->...b", cand, Q, cand)
        idx = np.argmax(norms, axis=-1)
        nmax = np.take_along_axis(norms, idx[..., None], axis=-1)[..., 0]
        if nmax.min() <= tol:
            bad = np.argwhere(nmax <= tol)
            raise FrameDegeneracyError(
                f"normal frame degenerate at step {step} "
                f"(worst norm {nmax.min():.3e})", nodes=[tuple(b) for b in bad[:5]])
        nu = np.take_along_axis(cand, idx[..., None, None], axis=-2)[..., 0, :]
        nu = nu / np.sqrt(nmax)[..., None]
        frame[..., step, :] = nu
        coeff = -np.einsum("...bi,ij,...j->...b", cand, Q, nu)
        cand = cand - coeff[..., None] * nu[..., None, :]
    return frame


def second_fundamental_form(h: SectionGrid, tol: float = 1e-10) -> SecondFundamentalForm:
    """Second fundamental form of a positive section, per node.

    Second differences of the values are projected onto the normal frame and
    the tangent indices are converted to the orthonormal tangent frame.
    Boundary nodes use one-sided differences; interior values carry the
    quadratic accuracy.
    """
    Q = h.space.matrix
    dh = grid_gradients(h.values, h.hstep)
    d2h = np.stack([grid_gradients(dh[..., i, :], h.hstep) for i in range(3)],
                   axis=-3)
    d2h = 0.5 * (d2h + np.swapaxes(d2h, -3, -2))
    tau, Linv = _tangent_frames(dh, Q)
    nu = _normal_frames(tau, Q, tol)
    coeff = np.einsum("...ijb,bc,...ac->...ija", d2h, Q, tau)
    n_part = d2h - np.einsum("...ija,...ab->...ijb", coeff, tau)
    comp = -np.einsum("...ijb,bc,...ac->...aij", n_part, Q, nu)
    S = np.einsum("...xi,...yj,...aij->...axy", Linv, Linv, comp)
    return SecondFundamentalForm(S=S, tangent=tau, normal=nu)


def induced_ricci(h: SectionGrid) -> np.ndarray:
    """Ricci tensor field of the induced metric, in the orthonormal frame.

    R_ik = sum_{a,j} S^a_ij S^a_kj - sum_a (sum_j S^a_jj) S^a_ik; the
    mean-curvature term keeps the formula valid away from maximality.
    """
    sff = second_fundamental_form(h)
    S = sff.S
    tr = np.einsum("...ajj->...a", S)
    return (np.einsum("...aij,...akj->...ik", S, S)
            - np.einsum("...a,...aik->...ik", tr, S))


def gauss_derivative_ricci(h: SectionGrid) -> np.ndarray:
    """Gauss-map characterization of the Ricci tensor.

    Differentiates the pairing-orthogonal projector onto the tangent plane
    by central differences and contracts the normal parts: on a maximal
    section Ric(xi, xi) is the squared norm of the Gauss-map derivative
    along xi.  Independent of second differences of the section values.
    """
    Q = h.space.matrix
    dh = grid_gradients(h.values, h.hstep)
    tau, Linv = _tangent_frames(dh, Q)
    P = np.einsum("...ga,...gb->...ab", tau, tau @ Q)
    dP = np.stack([np.gradient(P, h.hstep, axis=i, edge_order=2)
                   for i in range(3)], axis=-3)
    DP = np.einsum("...xi,...iab->...xab", Linv, dP)
    V = np.einsum("...xab,...gb->...xga", DP, tau)
    coeff = np.einsum("...xga,ab,...tb->...xgt", V, Q, tau)
    Vn = V - np.einsum("...xgt,...tb->...xgb", coeff, tau)
    return -np.einsum("...xga,ab,...ygb->...xy", Vn, Q, Vn)


@dataclass(frozen=True)
class CayleySample:
    """Element of Lambda^2_+ tensor Lambda^1 on 4-space in an adapted frame.

    The sample is s = sum_i v_i tensor omega_i with v_i = t_i e0 + sum_j
    s_ij e_j, written in an orthonormal frame whose first vector is e0.
    When kernel is set the fields satisfy the wedge-product kernel
    conditions (traceless s, t determined by its skew part).
    """

    t: tuple
    s: tuple  # 3x3, row-major tuples
    e0: tuple = (1.0, 0.0, 0.0, 0.0)
    kernel: bool = False

    def __post_init__(self):
        if len(self.t) != 3 or len(self.s) != 3 or any(len(r) != 3 for r in self.s):
            raise ValueError("expected t of length 3 and a 3x3 matrix s")
        if abs(np.dot(self.e0, self.e0) - 1.0) > 1e-12:
            raise ValueError("e0 must be a unit vector")

    @staticmethod
    def of(t, s, kernel: bool = False) -> "CayleySample":
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return CayleySample(tuple(t), tuple(map(tuple, s)), kernel=kernel)

    @staticmethod
    def wedge_kernel(s) -> "CayleySample":
        """Kernel sample built from any 3x3 matrix: the trace is removed and
        t_i = s_kj - s_jk for cyclic (i, j, k)."""
        s = np.asarray(s, dtype=float)
        s = s - np.trace(s) / 3.0 * np.eye(3)
        t = np.array([s[k, j] - s[j, k] for _, j, k in CYCLIC])
        return CayleySample.of(t, s, kernel=True)

    def vectors(self) -> np.ndarray:
        """The three frame vectors v_i as rows of a 3x4 array."""
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.s, dtype=float)
        return np.concatenate([t[:, None], s], axis=1)


def _wedge2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Components of u ^ v for 4-vectors, in lexicographic pair order."""
    return np.array([u[a] * v[b] - u[b] * v[a] for a, b in _PAIRS])


def wedge_image(sample: CayleySample) -> np.ndarray:
    """Components of sum_i v_i ^ omega_i in Lambda^3, lexicographic triples.

    Zero exactly when the sample satisfies the kernel conditions.
    """
    v = sample.vectors()
    out = np.zeros(4)
    for i in range(3):
        om = _OM[i]
        for r, (a, b, c) in enumerate(combinations(range(4), 3)):
            out[r] += (v[i][a] * om[_RANK2[(b, c)]]
                       - v[i][b] * om[_RANK2[(a, c)]]
                       + v[i][c] * om[_RANK2[(a, b)]])
    return out


def cayley_trace_identity(sample: CayleySample):
    """(lhs, rhs) of the trace identity for the quadratic map q.

    lhs evaluates T(q(s)) from the definitions: q pairs v_i ^ v_j with the
    cross product omega_i x omega_j = omega_k, and T combines the invariant
    trace on the self-dual part with the e0-trace on the anti-self-dual
    part, the latter via the isomorphism sending dx0 dx1 + dx2 dx3 to
    -dx0 dx1 + dx2 dx3.  rhs is the closed bilinear form
    sum_cyc t_i (s_jk - s_kj), which equals -sum t_i^2 on kernel samples.
    """
    v = sample.vectors()
    s = np.asarray(sample.s, dtype=float)
    t = np.asarray(sample.t, dtype=float)
    lhs = 0.0
    for k, l, m in CYCLIC:
        alpha = _wedge2(v[l], v[m])
        lhs += (alpha @ _OM[k] - alpha @ _OMB[k]) / 2.0
    if sample.kernel:
        rhs = -float(t @ t)
    else:
        rhs = float(sum(t[i] * (s[j, k] - s[k, j]) for i, j, k in CYCLIC))
    return float(lhs), rhs


def _coframe_compound(metric: np.ndarray) -> np.ndarray:
    """Second compound of the orthonormalizing coframe A with A^T A = g.

    Returns M with f^a ^ f^b = sum_u M[(a,b), u] dx^u over lexicographic
    pairs, per node.
    """
    L = np.linalg.cholesky(metric)
    A = np.swapaxes(L, -1, -2)
    lead = metric.shape[:-2]
    M = np.empty(lead + (6, 6))
    for r, (a, b) in enumerate(_PAIRS):
        for u, (i, j) in enumerate(_PAIRS):
            M[..., r, u] = (A[..., a, i] * A[..., b, j]
                            - A[..., a, j] * A[..., b, i])
    return M


def _frame_components(psi: np.ndarray, metric) -> np.ndarray:
    """Rewrite 2-form components in the orthonormal coframe of a metric."""
    if metric is None:
        return psi
    metric = np.asarray(metric, dtype=float)
    M = _coframe_compound(metric)
    MT = np.swapaxes(M, -1, -2)
    return np.linalg.solve(MT, psi)


def validate_adiabatic_cayley(psi: np.ndarray, pairing, hstep: float,
                              metric=None) -> dict:
    """Per-node residuals for vector-valued self-dual 2-form data on a 4-box.

    psi has shape (n0, n1, n2, n3, 6, m): six 2-form components in
    lexicographic pair order, each a vector in the target space.  Reports
    the anti-self-dual residual, the deviation of Psi*Psi from the identity
    (adjoint via the quadratic forms on both spaces), and the exterior
    derivative by central differences.  An optional per-node metric replaces
    the flat self-dual splitting.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 6 or psi.shape[4] != 6:
        raise ValueError("expected shape (n0, n1, n2, n3, 6, m)")
    if min(psi.shape[:4]) < 3:
        raise ValueError("need at least 3 nodes per axis")
    QH = _pairing_matrix(pairing)
    local = _frame_components(psi, metric)
    asd = np.einsum("ku,...um->...km", _OMB, local) / 2.0
    res_sd = np.sqrt(np.einsum("...km,...km->...", asd, asd))
    W = np.einsum("ku,...um->...km", _OM, local) / np.sqrt(2.0)
    U = np.einsum("...km,mn,...ln->...kl", W, QH, W)
    dev = U - np.eye(3)
    res_unit = np.sqrt(np.einsum("...kl,...kl->...", dev, dev))
    grads = [np.gradient(psi, hstep, axis=i, edge_order=2) for i in range(4)]
    res_closed = np.zeros(psi.shape[:4])
    for a, b, c in combinations(range(4), 3):
        d = (grads[a][..., _RANK2[(b, c)], :]
             - grads[b][..., _RANK2[(a, c)], :]
             + grads[c][..., _RANK2[(a, b)], :])
        res_closed = np.maximum(res_closed, np.abs(d).max(axis=-1))
    return {
        "self_dual": res_sd,
        "unitarity": res_unit,
        "closedness": res_closed,
        "max": {
            "self_dual": float(res_sd.max()),
            "unitarity": float(res_unit.max()),
            "closedness": float(res_closed.max()),
        },
    }


def _form_from_components(comp: np.ndarray) -> AltForm:
    f = AltForm.zero(4, 2)
    for c, pair in zip(comp, _PAIRS):
        if c != 0.0:
            f = f + AltForm.monomial(4, pair, float(c))
    return f


def special_normalize(psi_raw: np.ndarray, pairing, tol: float = 1e-8):
    """Metric normalization of special vector-valued 2-form data.

    Per node, the Gram matrix of the six component vectors has rank 3 with a
    positive image 3-plane in Lambda^2 for the wedge form; that plane fixes
    a conformal structure, and the scale is set so Psi*Psi is the identity
    on the self-dual space.  Returns (metric grid, psi_raw).
    """
    psi = np.asarray(psi_raw, dtype=float)
    if psi.ndim < 2 or psi.shape[-2] != 6:
        raise ValueError("expected trailing shape (6, m)")
    QH = _pairing_matrix(pairing)
    # wedge pairing of 2-forms against dx0123, lexicographic pair order
    Wp = np.zeros((6, 6))
    Wp[0, 5] = Wp[5, 0] = 1.0
    Wp[1, 4] = Wp[4, 1] = -1.0
    Wp[2, 3] = Wp[3, 2] = 1.0
    lead = psi.shape[:-2]
    flat = psi.reshape((-1, 6, psi.shape[-1]))
    metric = np.empty((flat.shape[0], 4, 4))
    for n in range(flat.shape[0]):
        K = np.einsum("um,mn,vn->uv", flat[n], QH, flat[n])
        lam, vec = np.linalg.eigh(K)
        if lam[2] > tol * max(lam[-1], 1.0):
            raise FrameDegeneracyError(f"component rank exceeds 3 at node {n}")
        if lam[3] <= tol * max(lam[-1], 1.0):
            raise FrameDegeneracyError(f"component rank below 3 at node {n}")
        basis = vec[:, 3:].T
        C = basis @ Wp @ basis.T
        if np.linalg.eigvalsh(C)[0] <= tol:
            raise FrameDegeneracyError(f"image 3-plane not positive at node {n}")
        Lc = np.linalg.cholesky(C)
        omega = np.sqrt(2.0) * np.linalg.solve(Lc, basis)
        # the plane determines the frame only up to O(3); exactly one
        # handedness is self-dual for a metric, so retry with a flip
        try:
            triple = HyperTriple(tuple(_form_from_components(o) for o in omega))
            g0 = conformal_structure(triple).metric
        except (ValueError, NotPositiveError):
            omega[2] = -omega[2]
            triple = HyperTriple(tuple(_form_from_components(o) for o in omega))
            g0 = conformal_structure(triple).metric
        local = _frame_components(flat[n][None, None, None, None],
                                  g0[None, None, None, None])[0, 0, 0, 0]
        Wf = np.einsum("ku,um->km", _OM, local) / np.sqrt(2.0)
        U = np.einsum("km,mn,ln->kl", Wf, QH, Wf)
        kappa = float(np.trace(U)) / 3.0
        if kappa <= tol:
            raise FrameDegeneracyError(f"non-positive scale at node {n}")
        metric[n] = g0 * np.sqrt(kappa)
    return metric.reshape(lead + (4, 4)), psi_raw
