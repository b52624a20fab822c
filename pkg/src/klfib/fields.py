"""Polynomial-coefficient differential forms with exact exterior derivative.

A :class:`PolyForm` is a k-form on R^n whose coefficients are real polynomials,
stored as sparse exponent-tuple dictionaries.  The exterior derivative is
computed symbolically (term by term), so closedness of a field can be checked
exactly rather than by finite differences.  Evaluation at a point produces an
:class:`~klfib.exterior.AltForm`.

The main consumer is :func:`closed_identity_residual`, which tests the
pointwise identity relating a closed positive 3-form field to the divergence
of its dual 4-form: for closed fields,  (v . phi) ^ d(*phi) = 0,  so the
central-difference evaluation of the left side must vanish at second order in
the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exterior import (
    AltForm,
    NotPositiveError,
    hodge_star,
    index_tuples,
    metric_of,
    sort_sign,
    tuple_rank,
    wedge,
    contract,
)


@dataclass(frozen=True)
class Poly:
    """Sparse real polynomial in n variables: {exponent tuple: coefficient}."""

    dim: int
    terms: dict

    @staticmethod
    def zero(dim: int) -> "Poly":
        return Poly(dim, {})

    @staticmethod
    def constant(dim: int, c: float) -> "Poly":
        if c == 0.0:
            return Poly.zero(dim)
        return Poly(dim, {(0,) * dim: float(c)})

    def __add__(self, other: "Poly") -> "Poly":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
            if terms[e] == 0.0:
                del terms[e]
        return Poly(self.dim, terms)

    def __mul__(self, scalar: float) -> "Poly":
        if scalar == 0.0:
            return Poly.zero(self.dim)
        return Poly(self.dim, {e: c * scalar for e, c in self.terms.items()})

    __rmul__ = __mul__

    def diff(self, i: int) -> "Poly":
        terms = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            terms[e2] = terms.get(e2, 0.0) + c * e[i]
        return Poly(self.dim, terms)

    def __call__(self, point) -> float:
        p = np.asarray(point, dtype=float)
        total = 0.0
        for e, c in self.terms.items():
            total += c * math.prod(p[i] ** k for i, k in enumerate(e) if k)
        return total

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)


@dataclass(frozen=True)
class PolyForm:
    """k-form on R^n with polynomial coefficients (one Poly per increasing tuple)."""

    dim: int
    degree: int
    polys: tuple

    def __post_init__(self):
        if len(self.polys) != math.comb(self.dim, self.degree):
            raise ValueError("wrong number of coefficient polynomials")

    @staticmethod
    def zero(dim: int, degree: int) -> "PolyForm":
        return PolyForm(dim, degree, tuple(Poly.zero(dim) for _ in range(math.comb(dim, degree))))

    @staticmethod
    def from_constant(a: AltForm) -> "PolyForm":
        return PolyForm(a.dim, a.degree, tuple(Poly.constant(a.dim, c) for c in a.coeffs))

    def __add__(self, other: "PolyForm") -> "PolyForm":
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise ValueError("shape mismatch")
        return PolyForm(self.dim, self.degree,
                        tuple(p + q for p, q in zip(self.polys, other.polys)))

    def __mul__(self, scalar: float) -> "PolyForm":
        return PolyForm(self.dim, self.degree, tuple(p * scalar for p in self.polys))

    __rmul__ = __mul__

    def d(self) -> "PolyForm":
        """Exterior derivative, exact on the polynomial coefficients."""
        out = [Poly.zero(self.dim) for _ in range(math.comb(self.dim, self.degree + 1))]
        rank = tuple_rank(self.dim, self.degree + 1)
        for I, P in zip(index_tuples(self.dim, self.degree), self.polys):
            if not P.terms:
                continue
            for i in range(self.dim):
                if i in I:
                    continue
                srt, sign = sort_sign((i,) + I)
                out[rank[srt]] = out[rank[srt]] + P.diff(i) * sign
        return PolyForm(self.dim, self.degree + 1, tuple(out))

    def __call__(self, point) -> AltForm:
        return AltForm(self.dim, self.degree, np.array([p(point) for p in self.polys]))

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(p.max_abs_coeff() <= tol for p in self.polys)


def random_poly(dim: int, rng: np.random.Generator, max_degree: int = 3,
                amplitude: float = 1.0) -> Poly:
    """Random sparse polynomial of total degree <= max_degree."""
    terms = {}
    n_terms = int(rng.integers(2, 6))
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        e = [0] * dim
        for _ in range(deg):
            e[int(rng.integers(0, dim))] += 1
        e = tuple(e)
        terms[e] = terms.get(e, 0.0) + amplitude * float(rng.normal())
    return Poly(dim, terms)


def random_closed_positive_field(rng: np.random.Generator,
                                 amplitude: float = 0.02) -> PolyForm:
    """A closed polynomial 3-form field on R^7, positive near the origin.

    Built as (constant model form) + d(eta) for a random polynomial 2-form
    eta, so closedness is exact by d o d = 0.  The amplitude keeps the field
    inside the positivity cone on the unit box.
    """
    from .exterior import standard_phi0

    eta = PolyForm(7, 2, tuple(random_poly(7, rng, 3, amplitude)
                               for _ in range(math.comb(7, 2))))
    return PolyForm.from_constant(standard_phi0()) + eta.d()


def closed_identity_residual(field: PolyForm, v: np.ndarray, point,
                             step: float) -> float:
    """| (v . phi) ^ d(*phi) | at a point, with central differences for d(*phi).

    ``field`` must be a closed positive 3-form field on R^7 (closedness is
    verified symbolically; positivity at the evaluation point numerically).
    For such fields the continuous quantity vanishes identically, so the
    returned value is pure discretization error, O(step^2).
    """
    if field.dim != 7 or field.degree != 3:
        raise ValueError("expected a 3-form field on R^7")
    scale = max(p.max_abs_coeff() for p in field.polys)
    if not field.d().is_zero(1e-12 * max(scale, 1.0)):
        raise ValueError("field is not closed")
    p = np.asarray(point, dtype=float)
    phi_p = field(p)
    try:
        metric_of(phi_p)
    except NotPositiveError:
        raise NotPositiveError(f"field not positive at {point}")

    def star_at(x):
        phi = field(x)
        return hodge_star(phi, metric_of(phi))

    dstar = AltForm.zero(7, 5)
    for i in range(7):
        ei = np.zeros(7)
        ei[i] = step
        diff = (star_at(p + ei) - star_at(p - ei)) * (0.5 / step)
        dstar = dstar + wedge(AltForm.monomial(7, (i,)), diff)
    top = wedge(contract(np.asarray(v, dtype=float), phi_p), dstar)
    return abs(float(top.coeffs[0]))
