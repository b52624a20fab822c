"""The even unimodular lattice of signature (3,19): U^3 + two E8(-1) blocks.

Coordinates are 22 integers ordered as (U, U, U, E8(-1), E8(-1)).  Each U block
is a hyperbolic pair (e, f) with Gram [[0,1],[1,0]]; each E8 block carries the
negative of the standard even positive definite E8 Gram matrix, written in the
simple-root basis (diagonal 2, off-diagonal -1 along the chain 1-3-4-5-6-7-8
with the branch node 2 attached to 4).

Supports the intersection pairing, root enumeration (self-pairing -2),
hyperplane reflections with an affine shift, positivity checks for real
3-planes, and enumeration of roots orthogonal to a given positive subspace
(compact search via the positive definite majorant form on the orthogonal
complement).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Simple-root adjacency of E8: chain 1-3-4-5-6-7-8 plus branch 2-4 (1-based).
_E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))


def e8_gram() -> np.ndarray:
    """Positive definite even Gram matrix of E8 in the simple-root basis."""
    g = 2 * np.eye(8, dtype=np.int64)
    for a, b in _E8_EDGES:
        g[a - 1, b - 1] = g[b - 1, a - 1] = -1
    return g


@lru_cache(maxsize=1)
def gram() -> np.ndarray:
    """The 22x22 intersection Gram matrix, signature (3,19), determinant 1."""
    U = np.array([[0, 1], [1, 0]], dtype=np.int64)
    g = np.zeros((22, 22), dtype=np.int64)
    for b in range(3):
        g[2 * b:2 * b + 2, 2 * b:2 * b + 2] = U
    e8 = e8_gram()
    g[6:14, 6:14] = -e8
    g[14:22, 14:22] = -e8
    g.setflags(write=False)
    return g


def gram_det_exact() -> int:
    """Determinant of the Gram matrix over the integers (fraction-free Bareiss)."""
    m = [[int(x) for x in row] for row in gram()]
    n = len(m)
    prev = 1
    sign = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class LatticeVector:
    """Integer vector in the rank-22 lattice."""

    coords: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coords)
        if len(c) != 22:
            raise ValueError("lattice vectors have 22 coordinates")
        object.__setattr__(self, "coords", c)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def height(self) -> int:
        return max(abs(x) for x in self.coords)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(tuple(-x for x in self.coords))

    def to_json(self) -> list:
        return list(self.coords)

    @staticmethod
    def from_json(obj) -> "LatticeVector":
        return LatticeVector(tuple(obj))

    @staticmethod
    def from_blocks(u=(0,) * 6, r1=(0,) * 8, r2=(0,) * 8) -> "LatticeVector":
        return LatticeVector(tuple(u) + tuple(r1) + tuple(r2))


def pairing(v, w) -> float:
    """Intersection pairing; exact integer when both inputs are integral."""
    va = v.array() if isinstance(v, LatticeVector) else np.asarray(v)
    wa = w.array() if isinstance(w, LatticeVector) else np.asarray(w)
    out = va @ (gram() @ wa)
    if va.dtype.kind == wa.dtype.kind == "i":
        return int(out)
    return float(out)


@dataclass(frozen=True)
class ReflectionDatum:
    """Reflection in a root hyperplane plus an affine shift along the root."""

    delta: LatticeVector
    shift: float = 0.0

    def __post_init__(self):
        if pairing(self.delta, self.delta) != -2:
            raise ValueError("reflection root must have self-pairing -2")


def reflect(r: ReflectionDatum, v):
    """tau(v) = v + (delta, v) delta + shift * delta; an affine involution."""
    d = r.delta.array()
    if isinstance(v, LatticeVector) and r.shift == int(r.shift):
        p = pairing(r.delta, v)
        return LatticeVector(tuple(v.array() + (p + int(r.shift)) * d))
    va = v.array() if isinstance(v, LatticeVector) else np.asarray(v, dtype=float)
    return va + (float(pairing(r.delta, v)) + r.shift) * d


@lru_cache(maxsize=1)
def e8_roots() -> tuple:
    """All 240 roots of E8 in the simple-root basis, by Weyl-orbit closure."""
    g = e8_gram()
    simple = [tuple(row) for row in np.eye(8, dtype=np.int64)]
    roots = set(simple)
    frontier = set(simple)
    while frontier:
        new = set()
        for r in frontier:
            ra = np.array(r, dtype=np.int64)
            for i in range(8):
                # reflection in simple root alpha_i: r - (r, alpha_i) alpha_i
                c = int(g[i] @ ra)
                img = ra.copy()
                img[i] -= c
                timg = tuple(int(x) for x in img)
                if timg not in roots:
                    new.add(timg)
        roots |= new
        frontier = new
    roots |= {tuple(-x for x in r) for r in roots}
    return tuple(sorted(roots))


@dataclass(frozen=True)
class ScanResult:
    """Height-truncated enumeration result: vectors plus the bound used."""

    vectors: tuple
    height_bound: int

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)


@lru_cache(maxsize=32)
def _e8_block_by_norm(height_bound: int, norm_max: int) -> dict:
    """E8-block vectors with norm <= norm_max and height <= bound, by norm.

    Enumerated as integer points of the norm ellipsoid (the Gram is positive
    definite), then height-filtered; far cheaper than a coordinate box.
    """
    vecs = _ellipsoid_points(e8_gram().astype(float), norm_max + 1e-9)
    vecs = vecs[np.abs(vecs).max(axis=1) <= height_bound]
    norms = np.einsum("ij,jk,ik->i", vecs, e8_gram(), vecs)
    buckets: dict = {}
    for n in np.unique(norms):
        buckets[int(n)] = vecs[norms == n]
    return buckets


ALL_BLOCKS = ("u1", "u2", "u3", "e8a", "e8b")


def iter_minus_two(height_bound: int, blocks=ALL_BLOCKS):
    """Yield every vector with self-pairing -2 and coordinate height <= bound.

    ``blocks`` restricts which coordinate blocks may be nonzero (the full
    22-variable scan grows into the millions already at height 1, so
    restricted scans are the practical mode).  Both signs of every class are
    produced.  The enumeration combines norm buckets per block, so cost scales
    with the answer size rather than with 3^22.
    """
    if height_bound < 0:
        raise ValueError("height bound must be >= 0")
    if height_bound == 0:
        return
    rng = range(-height_bound, height_bound + 1)
    zero2 = np.zeros((1, 2), dtype=np.int64)
    u_parts = []
    for name in ("u1", "u2", "u3"):
        if name in blocks:
            u_parts.append(np.array(list(itertools.product(rng, repeat=2)), dtype=np.int64))
        else:
            u_parts.append(zero2)
    u_vecs = np.array([np.concatenate(t) for t in itertools.product(*u_parts)],
                      dtype=np.int64)
    u_norm = 2 * (u_vecs[:, 0] * u_vecs[:, 1] + u_vecs[:, 2] * u_vecs[:, 3]
                  + u_vecs[:, 4] * u_vecs[:, 5])
    u_buckets = {int(n): u_vecs[u_norm == n] for n in np.unique(u_norm)}
    zero8 = {0: np.zeros((1, 8), dtype=np.int64)}
    norm_max = max(u_buckets) + 2  # n1 + n2 = qU + 2 and both are >= 0
    if norm_max < 0:
        return
    b1s = _e8_block_by_norm(height_bound, norm_max) if "e8a" in blocks else zero8
    b2s = _e8_block_by_norm(height_bound, norm_max) if "e8b" in blocks else zero8
    for qu, ub in u_buckets.items():
        for n1, b1 in b1s.items():
            n2 = qu - n1 + 2
            if n2 not in b2s:
                continue
            for u in ub:
                for r1 in b1:
                    for r2 in b2s[n2]:
                        yield LatticeVector(tuple(u) + tuple(r1) + tuple(r2))


def minus_two_classes(height_bound: int, blocks=ALL_BLOCKS,
                      max_results: int = 2_000_000) -> ScanResult:
    """Collected form of :func:`iter_minus_two`, guarded by ``max_results``."""
    out = []
    for v in iter_minus_two(height_bound, blocks):
        out.append(v)
        if len(out) > max_results:
            raise RuntimeError(
                f"enumeration exceeds max_results={max_results} at height {height_bound}")
    return ScanResult(tuple(out), height_bound)


def positive_subspace_check(basis):
    """Is the real span of the basis positive for the pairing?

    Returns (bool, eigenvalues of the pairing Gram of the basis).
    """
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if not 1 <= B.shape[0] <= 3 or B.shape[1] != 22:
        raise ValueError("basis must be 1 to 3 vectors of length 22")
    if np.linalg.matrix_rank(B) < B.shape[0]:
        raise ValueError("basis is rank deficient")
    G = B @ gram() @ B.T
    ev = np.linalg.eigvalsh(G)
    return bool(ev.min() > 0), ev


def _ellipsoid_points(M: np.ndarray, bound: float):
    """Integer points v with v^T M v <= bound for positive definite M.

    Recursive branch-and-bound on a Cholesky factorization (the standard
    short-vector enumeration); returns an array of integer rows including 0.
    """
    L = np.linalg.cholesky(M)  # M = L L^T, Q(v) = |L^T v|^2
    R = L.T
    n = M.shape[0]
    out = []
    v = np.zeros(n, dtype=np.int64)

    def recurse(i, remaining, offset):
        # offset: sum_{j>i} R[i, j] v_j for each row computed lazily below
        if i < 0:
            out.append(v.copy())
            return
        # coordinate i contributes (R[i,i] v_i + c)^2 with c from fixed tail
        c = float(R[i, i + 1:] @ v[i + 1:])
        rad = np.sqrt(max(remaining, 0.0))
        lo = int(np.ceil((-rad - c) / R[i, i] - 1e-12))
        hi = int(np.floor((rad - c) / R[i, i] + 1e-12))
        for vi in range(lo, hi + 1):
            v[i] = vi
            term = (R[i, i] * vi + c) ** 2
            if term <= remaining + 1e-12:
                recurse(i - 1, remaining - term, None)
        v[i] = 0

    recurse(n - 1, float(bound), None)
    return np.array(out, dtype=np.int64).reshape(-1, n)


def orthogonal_roots(basis, height_bound: int, tol: float = 1e-8,
                     blocks=ALL_BLOCKS) -> ScanResult:
    """Height-bounded -2 classes near-orthogonal to every basis vector.

    Returns all integral delta with delta.delta = -2, height <= height_bound
    and |pairing(delta, b_i)| <= tol for each basis vector b_i.  When the span
    of the basis is maximal positive its complement is negative definite, so
    the search reduces to integer points of a compact ellipsoid; otherwise
    (including tol = inf) the height-bounded scan is filtered directly, where
    ``blocks`` keeps the fallback tractable (it is ignored on the compact
    path, which is complete).
    """
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    G = np.asarray(gram(), dtype=float)
    gb = B @ G  # rows: metric duals of the basis
    gram_b = B @ G @ B.T
    pos, ev = positive_subspace_check(B)
    compact = pos and B.shape[0] == 3 and np.isfinite(tol)
    if not compact:
        found = [d for d in iter_minus_two(height_bound, blocks)
                 if all(abs(pairing(d, b)) <= tol for b in B)]
        return ScanResult(tuple(found), height_bound)
    # Majorant: Q(v) = -v^T G v + 2 sum_i c_i(v)^2 entries over the dual basis
    # is positive definite and equals 2 + sum c_i^2-terms on solutions.
    ginv = np.linalg.inv(gram_b)
    M = -G + 2.0 * gb.T @ ginv @ gb
    slack = 2.0 * float(tol ** 2 * np.abs(ginv).sum()) + 1e-9
    pts = _ellipsoid_points(M, 2.0 + slack)
    found = []
    for p in pts:
        if np.abs(p).max() > height_bound:
            continue
        if int(p @ gram() @ p) != -2:
            continue
        if np.abs(gb @ p).max() <= tol:
            found.append(LatticeVector(tuple(p)))
    found.sort(key=lambda d: d.coords)
    return ScanResult(tuple(found), height_bound)
