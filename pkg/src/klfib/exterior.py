"""Exact exterior algebra on oriented n-space (n <= 8) and the positive 3-form calculus.

Alternating forms are stored densely: one float64 coefficient per strictly
increasing index tuple, in lexicographic order (C(n,k) entries).  At n <= 8
the largest coefficient array is C(8,4) = 70, so dense wins over sparse.

Convention used throughout for the 7-space model: coordinates are ordered
(x0, x1, x2, x3, t1, t2, t3) and the compatible orientation is *minus* the
lexicographic 7-form dx0...dx3 dt1 dt2 dt3.  With that orientation the model
form  phi0 = sum_i omega_i dt_i - dt1 dt2 dt3  is positive and induces the
standard Euclidean metric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DIM = 8

# Orientation sign of the (x0..x3, t1..t3) model relative to the
# lexicographic basis 7-form.
MODEL_ORIENTATION = -1


class ShapeError(ValueError):
    """Dimension/degree mismatch between operands."""


class NotPositiveError(ValueError):
    """A quadratic form that must be positive definite is not."""


@lru_cache(maxsize=None)
def index_tuples(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing k-tuples from range(n), lexicographic."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def tuple_rank(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {t: i for i, t in enumerate(index_tuples(n, k))}


def sort_sign(indices: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Sort an index tuple; return (sorted tuple, permutation sign).

    Returns sign 0 when an index repeats.
    """
    if len(set(indices)) != len(indices):
        return indices, 0
    inv = 0
    arr = list(indices)
    for i in range(len(arr)):
        for j in range(i + 1, len(arr)):
            if arr[i] > arr[j]:
                inv += 1
    return tuple(sorted(arr)), (-1) ** inv


@dataclass(frozen=True)
class AltForm:
    """Alternating k-form on oriented n-space, canonical dense coefficients."""

    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not (0 <= self.degree <= self.dim <= MAX_DIM):
            raise ShapeError(f"bad shape: dim={self.dim} degree={self.degree}")
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (math.comb(self.dim, self.degree),):
            raise ShapeError(
                f"coefficient array must have C({self.dim},{self.degree}) entries, got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        object.__setattr__(self, "coeffs", c)

    # -- constructors ---------------------------------------------------
    @staticmethod
    def zero(dim: int, degree: int) -> "AltForm":
        return AltForm(dim, degree, np.zeros(math.comb(dim, degree)))

    @staticmethod
    def monomial(dim: int, indices: tuple[int, ...], coeff: float = 1.0) -> "AltForm":
        """c * dx_{i1} ^ ... ^ dx_{ik} for an arbitrary (unsorted) index tuple."""
        srt, sign = sort_sign(tuple(indices))
        f = AltForm.zero(dim, len(indices))
        if sign != 0:
            f.coeffs[tuple_rank(dim, len(indices))[srt]] = sign * coeff
        return f

    @staticmethod
    def from_assignment(dim: int, degree: int, entries) -> "AltForm":
        """Build from {index tuple: value}; tuples may be unsorted, values accumulate."""
        f = AltForm.zero(dim, degree)
        rank = tuple_rank(dim, degree)
        for idx, val in dict(entries).items():
            srt, sign = sort_sign(tuple(idx))
            if sign != 0:
                f.coeffs[rank[srt]] += sign * val
        return f

    # -- element access -------------------------------------------------
    def component(self, indices: tuple[int, ...]) -> float:
        """Signed coefficient for an arbitrary (possibly unsorted) index tuple."""
        srt, sign = sort_sign(tuple(indices))
        if sign == 0:
            return 0.0
        return sign * float(self.coeffs[tuple_rank(self.dim, self.degree)[srt]])

    # -- linear structure -----------------------------------------------
    def __add__(self, other: "AltForm") -> "AltForm":
        self._check_same_shape(other)
        return AltForm(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "AltForm") -> "AltForm":
        self._check_same_shape(other)
        return AltForm(self.dim, self.degree, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "AltForm":
        return AltForm(self.dim, self.degree, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "AltForm":
        return AltForm(self.dim, self.degree, -self.coeffs)

    def _check_same_shape(self, other: "AltForm"):
        if self.dim != other.dim or self.degree != other.degree:
            raise ShapeError("shape mismatch")

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        return {"dim": self.dim, "degree": self.degree, "coeffs": [float(c) for c in self.coeffs]}

    @staticmethod
    def from_json(obj: dict) -> "AltForm":
        return AltForm(int(obj["dim"]), int(obj["degree"]), np.array(obj["coeffs"], dtype=float))


@dataclass(frozen=True)
class EuclideanStructure:
    """Positive definite metric plus a volume scalar on oriented n-space.

    The volume form is ``volume * orientation * dx_lex`` where dx_lex is the
    lexicographic basis n-form and orientation is +-1 (the sign of the chosen
    orientation relative to lexicographic order).
    """

    metric: np.ndarray
    volume: float
    orientation: int = 1

    def __post_init__(self):
        m = np.asarray(self.metric, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError("metric must be square")
        if not np.allclose(m, m.T, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ValueError("metric must be symmetric")
        if np.linalg.eigvalsh(m).min() <= 0:
            raise NotPositiveError("metric must be positive definite")
        if self.volume <= 0:
            raise ValueError("volume must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +-1")
        object.__setattr__(self, "metric", m)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def volume_coeff(self) -> float:
        """Signed coefficient of the volume form against the lexicographic n-form."""
        return self.orientation * self.volume

    @staticmethod
    def standard(n: int, orientation: int = 1) -> "EuclideanStructure":
        return EuclideanStructure(np.eye(n), 1.0, orientation)


@dataclass(frozen=True)
class Subspace:
    """Linear subspace given by a full-rank basis."""

    ambient_dim: int
    basis: np.ndarray  # (rank, ambient_dim)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.shape[1] != self.ambient_dim:
            raise ShapeError("basis vectors have wrong length")
        if np.linalg.matrix_rank(b) != b.shape[0]:
            raise ValueError("basis is rank deficient")
        object.__setattr__(self, "basis", b)

    @property
    def rank(self) -> int:
        return self.basis.shape[0]


# ---------------------------------------------------------------------------
# multiplication tables (cached)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _wedge_table(n: int, k: int, l: int):
    """Arrays (ia, ib, iout, sign) over all pairs with disjoint index tuples."""
    ta, tb = index_tuples(n, k), index_tuples(n, l)
    rank_out = tuple_rank(n, k + l)
    ia, ib, io, sg = [], [], [], []
    for i, I in enumerate(ta):
        si = set(I)
        for j, J in enumerate(tb):
            if si & set(J):
                continue
            srt, sign = sort_sign(I + J)
            ia.append(i)
            ib.append(j)
            io.append(rank_out[srt])
            sg.append(sign)
    return (np.array(ia, dtype=int), np.array(ib, dtype=int),
            np.array(io, dtype=int), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _contract_table(n: int, k: int):
    """Arrays (ivec, iin, iout, sign): (v . a)_J = sum sign * v[ivec] * a[iin]."""
    rank_out = tuple_rank(n, k - 1)
    iv, ii, io, sg = [], [], [], []
    for i_in, I in enumerate(index_tuples(n, k)):
        for pos, idx in enumerate(I):
            J = I[:pos] + I[pos + 1:]
            iv.append(idx)
            ii.append(i_in)
            io.append(rank_out[J])
            sg.append((-1.0) ** pos)
    return (np.array(iv, dtype=int), np.array(ii, dtype=int),
            np.array(io, dtype=int), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _complement_table(n: int, k: int):
    """For each k-tuple I: (rank of complement Ic, sign with dx_I ^ dx_Ic = sign * dx_lex)."""
    rank_c = tuple_rank(n, n - k)
    comp, sg = [], []
    for I in index_tuples(n, k):
        Ic = tuple(i for i in range(n) if i not in I)
        _, sign = sort_sign(I + Ic)
        comp.append(rank_c[Ic])
        sg.append(sign)
    return np.array(comp, dtype=int), np.array(sg, dtype=float)


@lru_cache(maxsize=None)
def _minor_index(n: int, k: int):
    """Index arrays so that gram_k = det(minv[IX]) can be vectorized."""
    tups = np.array(index_tuples(n, k), dtype=int)  # (N, k)
    rows = tups[:, None, :, None]  # (N,1,k,1)
    cols = tups[None, :, None, :]  # (1,M,1,k)
    return rows, cols


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def wedge(a: AltForm, b: AltForm) -> AltForm:
    """Exterior product a ^ b."""
    if a.dim != b.dim:
        raise ShapeError("dimension mismatch")
    if a.degree + b.degree > a.dim:
        raise ShapeError("degree overflow")
    ia, ib, io, sg = _wedge_table(a.dim, a.degree, b.degree)
    out = np.zeros(math.comb(a.dim, a.degree + b.degree))
    np.add.at(out, io, sg * a.coeffs[ia] * b.coeffs[ib])
    return AltForm(a.dim, a.degree + b.degree, out)


def contract(v: np.ndarray, a: AltForm) -> AltForm:
    """Interior product v . a (hook); degree drops by one."""
    v = np.asarray(v, dtype=float)
    if v.shape != (a.dim,):
        raise ShapeError("vector length must equal form dimension")
    if a.degree < 1:
        raise ShapeError("cannot contract a 0-form")
    iv, ii, io, sg = _contract_table(a.dim, a.degree)
    out = np.zeros(math.comb(a.dim, a.degree - 1))
    np.add.at(out, io, sg * v[iv] * a.coeffs[ii])
    return AltForm(a.dim, a.degree - 1, out)


def evaluate(a: AltForm, vectors) -> float:
    """Evaluate the k-form on k vectors by repeated contraction."""
    f = a
    for v in vectors:
        f = contract(v, f)
    if f.degree != 0:
        raise ShapeError("number of vectors must equal the degree")
    return float(f.coeffs[0])


def form_gram(e: EuclideanStructure, k: int) -> np.ndarray:
    """Gram matrix of the induced inner product on k-forms (basis = increasing tuples)."""
    minv = np.linalg.inv(e.metric)
    if k == 0:
        return np.ones((1, 1))
    rows, cols = _minor_index(e.dim, k)
    minors = minv[rows, cols]  # (N, M, k, k)
    return np.linalg.det(minors)


def inner(a: AltForm, b: AltForm, e: EuclideanStructure) -> float:
    """Metric inner product of two k-forms."""
    a._check_same_shape(b)
    return float(a.coeffs @ form_gram(e, a.degree) @ b.coeffs)


def hodge_star(a: AltForm, e: EuclideanStructure) -> AltForm:
    """Hodge star of a, defined by b ^ *a = <b, a> vol for all k-forms b."""
    if a.dim != e.dim:
        raise ShapeError("dimension mismatch")
    g = form_gram(e, a.degree) @ a.coeffs
    comp, sg = _complement_table(a.dim, a.degree)
    out = np.zeros(math.comb(a.dim, a.dim - a.degree))
    out[comp] = e.volume_coeff * sg * g
    return AltForm(a.dim, a.dim - a.degree, out)


# ---------------------------------------------------------------------------
# positive 3-forms on 7-space
# ---------------------------------------------------------------------------

def standard_phi0() -> AltForm:
    """The model positive 3-form on (x0..x3, t1..t3)-ordered 7-space."""
    # omega_i = dx0 dxi + dxj dxk for (i,j,k) cyclic; t_i has index 3 + i.
    entries = {}
    for i, j, k in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        entries[(0, i, 3 + i)] = 1.0
        entries[(j, k, 3 + i)] = 1.0
    entries[(4, 5, 6)] = -1.0
    return AltForm.from_assignment(7, 3, entries)


def gphi(phi: AltForm, orientation: int = MODEL_ORIENTATION) -> np.ndarray:
    """Symmetric 7x7 matrix G with G(v,v) * (orientation 7-form) = (v . phi)^2 ^ phi.

    G is cubic in phi.  ``orientation`` is the sign of the ambient orientation
    against the lexicographic basis 7-form.
    """
    if phi.dim != 7 or phi.degree != 3:
        raise ShapeError("gphi expects a 3-form on 7-space")
    cs = [contract(e, phi) for e in np.eye(7)]
    G = np.empty((7, 7))
    for i in range(7):
        wi = wedge(cs[i], phi)  # 5-form, reused across j
        for j in range(i, 7):
            G[i, j] = G[j, i] = orientation * wedge(cs[j], wi).coeffs[0]
    return G


def is_positive(phi: AltForm, orientation: int = MODEL_ORIENTATION):
    """Positivity test; returns (bool, margin).

    The margin is the smallest eigenvalue of gphi normalized by the largest
    absolute eigenvalue (1 for the model form up to scale), so it is a
    scale-free definiteness measure usable for perturbation bounds.
    """
    G = gphi(phi, orientation)
    ev = np.linalg.eigvalsh(G)
    scale = max(np.abs(ev).max(), 1e-300)
    margin = ev.min() / scale
    return bool(ev.min() > 0), float(margin)


def metric_of(phi: AltForm, orientation: int = MODEL_ORIENTATION) -> EuclideanStructure:
    """Euclidean structure of a positive 3-form, normalized so |phi|^2 = 7.

    Exponent bookkeeping: gphi measured against a trial volume rho*(oriented
    lex form) scales as G/rho, and the true metric satisfies
    (v . phi)^2 ^ phi = 6 g(v,v) vol_g.  Writing g = G/(6c) with vol
    coefficient c, compatibility c = sqrt(det g) gives the closed form
    c^9 = det(G) / 6^7.  This choice automatically yields |phi|^2 = 7.
    """
    G = gphi(phi, orientation)
    ev = np.linalg.eigvalsh(G)
    if ev.min() <= 0:
        raise NotPositiveError(f"gphi not positive definite (min eig {ev.min():.3e})")
    c = (np.linalg.det(G) / 6.0 ** 7) ** (1.0 / 9.0)
    return EuclideanStructure(G / (6.0 * c), float(c), orientation)


def coassociative_check(phi: AltForm, V: Subspace, tol: float = 1e-10):
    """Does phi restrict to zero on the 4-dimensional subspace V?

    Returns (bool, residual) with residual = max over basis triples of
    |phi(v_a, v_b, v_c)|.
    """
    if V.rank != 4:
        raise ShapeError("co-associative subspaces have dimension 4")
    if V.ambient_dim != phi.dim:
        raise ShapeError("ambient dimension mismatch")
    res = 0.0
    for a, b, c in itertools.combinations(range(4), 3):
        res = max(res, abs(evaluate(phi, (V.basis[a], V.basis[b], V.basis[c]))))
    scale = max(np.abs(phi.coeffs).max(), 1.0)
    return bool(res <= tol * scale), float(res)
