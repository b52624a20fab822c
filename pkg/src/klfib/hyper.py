"""Pointwise hypersymplectic/hyperkahler algebra on oriented 4-space.

A triple of 2-forms (omega_1, omega_2, omega_3) is hypersymplectic when its
wedge Gram matrix (against the standard volume form dx0123) is positive
definite; the flat model is the standard self-dual basis
omega_i = dx0 dxi + dxj dxk (cyclic).  This module supplies the positivity
tests, the dual-form coefficients used to build the 7-space dual 4-form, the
vector/covector exchange map with its quaternionic model, the assembly of the
positive 3-form on 7-space from a triple, and two small projection operators
used by the curvature verifiers.

Convention: the 3-form on 7-space is assembled as
phi = sum_i omega_i ^ dt_i - lam * dt1 dt2 dt3 with lam > 0, in coordinates
(x0, x1, x2, x3, t1, t2, t3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import (
    AltForm,
    EuclideanStructure,
    ShapeError,
    hodge_star,
    metric_of,
    tuple_rank,
    wedge,
    contract,
)

CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

_VOL4_RANK = 0  # C(4,4) = 1, single coefficient


class SingularTripleError(ValueError):
    """The exchange-map system of a triple is numerically singular."""


@dataclass(frozen=True)
class HyperTriple:
    """Three 2-forms on the same oriented 4-space."""

    omega: tuple

    def __post_init__(self):
        if len(self.omega) != 3:
            raise ShapeError("a triple has exactly three 2-forms")
        for w in self.omega:
            if not (isinstance(w, AltForm) and w.dim == 4 and w.degree == 2):
                raise ShapeError("each entry must be a 2-form on 4-space")

    @staticmethod
    def standard() -> "HyperTriple":
        """omega_i = dx0 ^ dxi + dxj ^ dxk for cyclic (i,j,k)."""
        return HyperTriple(tuple(
            AltForm.from_assignment(4, 2, {(0, i + 1): 1.0, (j + 1, k + 1): 1.0})
            for i, j, k in CYCLIC))

    def mixed(self, M: np.ndarray) -> "HyperTriple":
        """Linear recombination omega'_i = sum_j M_ij omega_j."""
        M = np.asarray(M, dtype=float)
        return HyperTriple(tuple(
            AltForm(4, 2, M[i, 0] * self.omega[0].coeffs
                    + M[i, 1] * self.omega[1].coeffs
                    + M[i, 2] * self.omega[2].coeffs)
            for i in range(3)))

    def pullback(self, P: np.ndarray) -> "HyperTriple":
        """Pull each form back by the linear map with matrix P."""
        return HyperTriple(tuple(pullback_form(w, P) for w in self.omega))

    def to_json(self) -> list:
        return [w.to_json() for w in self.omega]

    @staticmethod
    def from_json(obj) -> "HyperTriple":
        return HyperTriple(tuple(AltForm.from_json(o) for o in obj))


def pullback_form(a: AltForm, P: np.ndarray) -> AltForm:
    """Pullback of a k-form by the linear map x -> Px."""
    P = np.asarray(P, dtype=float)
    n = a.dim
    out = AltForm.zero(n, a.degree)
    # (P*a)(v_1..v_k) = a(Pv_1, .., Pv_k); evaluate on basis tuples.
    from .exterior import index_tuples, evaluate
    for r, I in enumerate(index_tuples(n, a.degree)):
        out.coeffs[r] = evaluate(a, [P[:, i] for i in I])
    return out


def wedge_gram(t: HyperTriple) -> np.ndarray:
    """Symmetric 3x3 matrix a with omega_i ^ omega_j = a_ij * dx0123."""
    A = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            A[i, j] = A[j, i] = wedge(t.omega[i], t.omega[j]).coeffs[_VOL4_RANK]
    return A


def is_hypersymplectic(t: HyperTriple):
    """Positivity of the wedge Gram; returns (bool, margin = min eig / max eig)."""
    ev = np.linalg.eigvalsh(wedge_gram(t))
    scale = max(abs(ev[0]), abs(ev[-1]), 1e-300)
    return bool(ev[0] > 0), float(ev[0] / scale)


def det13(t: HyperTriple) -> AltForm:
    """The volume form det^{1/3} of the wedge Gram, independent of the reference.

    Changing the reference volume chi scales the Gram by 1/chi and the
    chi-multiple by chi, so det^{1/3}(gram) * chi is invariant.
    """
    d = np.linalg.det(wedge_gram(t))
    if d <= 0:
        raise ValueError(f"wedge Gram determinant must be positive, got {d:.3e}")
    return AltForm.from_assignment(4, 4, {(0, 1, 2, 3): d ** (1.0 / 3.0)})


def theta_mu(t: HyperTriple, lam: float):
    """Coefficients of the dual 4-form of the assembled 3-form on 7-space.

    For phi = sum omega_i dt_i - lam dt1 dt2 dt3 the Hodge dual splits as
    *phi = sum_cyclic Theta_i ^ dt_j ^ dt_k + mu with Theta_i in the span of
    the omegas and mu a 4-form in the x-directions.  Returns (C, mu) where
    Theta_i = sum_j C_ij omega_j.

    Closed form: with A the wedge Gram and d = det(A)^{1/3},
    C = -lam^{1/3} d A^{-1} and mu = (1/2) d lam^{-2/3} dx0123.  The signs and
    the 1/2 are pinned by the 7-dimensional Hodge star (see tests), which is
    the authoritative definition.
    """
    ok, margin = is_hypersymplectic(t)
    if not ok:
        raise ValueError(f"triple is not hypersymplectic (margin {margin:.3e})")
    if lam <= 0:
        raise ValueError("lam must be positive")
    A = wedge_gram(t)
    d = np.linalg.det(A) ** (1.0 / 3.0)
    C = -lam ** (1.0 / 3.0) * d * np.linalg.inv(A)
    mu = AltForm.from_assignment(4, 4, {(0, 1, 2, 3): 0.5 * d * lam ** (-2.0 / 3.0)})
    return C, mu


def theta_forms(t: HyperTriple, lam: float):
    """The three Theta 2-forms themselves (C rows applied to the triple)."""
    C, _ = theta_mu(t, lam)
    return tuple(
        AltForm(4, 2, C[i, 0] * t.omega[0].coeffs + C[i, 1] * t.omega[1].coeffs
                + C[i, 2] * t.omega[2].coeffs)
        for i in range(3))


def embed_x(a: AltForm) -> AltForm:
    """Embed a k-form on the x-4-space into 7-space (x0..x3, t1..t3)."""
    out = AltForm.zero(7, a.degree)
    rank7 = tuple_rank(7, a.degree)
    from .exterior import index_tuples
    for I, c in zip(index_tuples(4, a.degree), a.coeffs):
        out.coeffs[rank7[I]] = c
    return out


def assemble_phi(t: HyperTriple, lam: float) -> AltForm:
    """phi = sum_i omega_i ^ dt_i - lam dt1 dt2 dt3 on 7-space."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    phi = AltForm.monomial(7, (4, 5, 6), -lam)
    for i in range(3):
        phi = phi + wedge(embed_x(t.omega[i]), AltForm.monomial(7, (4 + i,)))
    return phi


def s_map(t: HyperTriple, v) -> np.ndarray:
    """Exchange map: three vectors -> three covectors.

    a_k = v_j . omega_i - v_i . omega_j for cyclic (i,j,k); for the standard
    triple this is the quaternionic expression (J v3 - K v2, K v1 - I v3,
    I v2 - J v1) under the metric identification.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3, 4):
        raise ShapeError("expected three 4-vectors")
    out = np.empty((3, 4))
    for i, j, k in CYCLIC:
        out[k] = contract(v[j], t.omega[i]).coeffs - contract(v[i], t.omega[j]).coeffs
    return out


def s_matrix(t: HyperTriple) -> np.ndarray:
    """The 12x12 matrix of s_map in the standard flattened basis."""
    M = np.empty((12, 12))
    for col in range(12):
        v = np.zeros((3, 4))
        v[col // 4, col % 4] = 1.0
        M[:, col] = s_map(t, v).ravel()
    return M


def s_inverse(t: HyperTriple, a) -> np.ndarray:
    """Solve s_map(t, v) = a for the three vectors v."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 4):
        raise ShapeError("expected three covectors")
    M = s_matrix(t)
    if np.linalg.cond(M) > 1e12:
        raise SingularTripleError("exchange map numerically singular")
    return np.linalg.solve(M, a.ravel()).reshape(3, 4)


def sym0_project(S: np.ndarray) -> np.ndarray:
    """T = S + S^T - (2/3) tr(S) I: twice the symmetric trace-free part."""
    S = np.asarray(S, dtype=float)
    if S.shape != (3, 3):
        raise ShapeError("expected a 3x3 matrix")
    return S + S.T - (2.0 / 3.0) * np.trace(S) * np.eye(3)


def p_contract(psi, t: HyperTriple, e: EuclideanStructure) -> AltForm:
    """sum_i (*psi_i) ^ omega_i for three 3-forms psi_i on 4-space."""
    if len(psi) != 3:
        raise ShapeError("expected three 3-forms")
    out = AltForm.zero(4, 3)
    for p, w in zip(psi, t.omega):
        if not (p.dim == 4 and p.degree == 3):
            raise ShapeError("each psi must be a 3-form on 4-space")
        out = out + wedge(hodge_star(p, e), w)
    return out


def conformal_structure(t: HyperTriple) -> EuclideanStructure:
    """The det-1 metric on 4-space whose self-dual 2-forms are span(omega).

    Read off from the metric of the assembled positive 3-form on 7-space: the
    x-block of that metric makes the triple self-dual, and normalizing its
    determinant to 1 picks the conformal representative.
    """
    ok, margin = is_hypersymplectic(t)
    if not ok:
        raise ValueError(f"triple is not hypersymplectic (margin {margin:.3e})")
    g7 = metric_of(assemble_phi(t, 1.0)).metric
    g4 = g7[:4, :4]
    g4 = g4 / np.linalg.det(g4) ** 0.25
    return EuclideanStructure(g4, 1.0, 1)
