"""Univariate polynomials over Q(i, sqrt 2): minimal polynomials and roots."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .field import ONE, ZERO, Scalar
from .linalg import EchelonBasis, Vector, vec_axpy


class UPoly:
    """Polynomial c0 + c1 t + ... stored low degree first, without trailing zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [Scalar.coerce(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Scalar:
        return self.coeffs[-1]

    def monic(self) -> "UPoly":
        inv = self.lead().inverse()
        return UPoly([c * inv for c in self.coeffs])

    def __add__(self, other: "UPoly") -> "UPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [ZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [ZERO] * (n - len(other.coeffs))
        return UPoly([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "UPoly":
        return UPoly([-c for c in self.coeffs])

    def __sub__(self, other: "UPoly") -> "UPoly":
        return self + (-other)

    def __mul__(self, other: "UPoly") -> "UPoly":
        if self.is_zero() or other.is_zero():
            return UPoly([])
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UPoly(out)

    def __eq__(self, other):
        return isinstance(other, UPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def divmod(self, divisor: "UPoly") -> tuple["UPoly", "UPoly"]:
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [ZERO] * max(0, len(rem) - divisor.degree)
        inv_lead = divisor.lead().inverse()
        while len(rem) - 1 >= divisor.degree and rem:
            shift = len(rem) - 1 - divisor.degree
            factor = rem[-1] * inv_lead
            quot[shift] = factor
            for i, c in enumerate(divisor.coeffs):
                rem[shift + i] = rem[shift + i] - factor * c
            rem.pop()
            while rem and not rem[-1]:
                rem.pop()
        return UPoly(quot), UPoly(rem)

    def __call__(self, value: Scalar) -> Scalar:
        total = ZERO
        for c in reversed(self.coeffs):
            total = total * value + c
        return total

    def derivative(self) -> "UPoly":
        return UPoly([c * k for k, c in enumerate(self.coeffs)][1:])

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            parts.append(f"({c})" + ("" if k == 0 else "*t" if k == 1 else f"*t^{k}"))
        return " + ".join(reversed(parts)) or "0"


def upoly_gcd(a: UPoly, b: UPoly) -> UPoly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic() if not a.is_zero() else a


def upoly_lcm(a: UPoly, b: UPoly) -> UPoly:
    if a.is_zero() or b.is_zero():
        return UPoly([])
    g = upoly_gcd(a, b)
    return (a * b).divmod(g)[0].monic()


def linear_factor(root: Scalar) -> UPoly:
    return UPoly([-root, ONE])


def apply_polynomial(poly: UPoly, op: Callable[[Vector], Vector], vec: Vector) -> Vector:
    """poly(op) applied to vec via Horner's rule."""
    acc: Vector = {}
    for c in reversed(poly.coeffs):
        acc = op(acc)
        vec_axpy(acc, c, vec)
    return acc


def vector_minimal_polynomial(op: Callable[[Vector], Vector], vec: Vector, dim: int) -> UPoly:
    """Monic polynomial of least degree annihilating vec under op."""
    if not vec:
        return UPoly([ONE])
    # track combinations: augment each Krylov vector with a marker coordinate
    ech = EchelonBasis(dim + dim + 1)
    current = dict(vec)
    k = 0
    while True:
        aug = dict(current)
        aug[dim + k] = ONE
        rem = ech.reduce(aug)
        if not any(idx < dim for idx in rem):
            # current + sum of lower marker combination = 0: read relation from markers
            coeffs = [ZERO] * (k + 1)
            for idx, value in rem.items():
                coeffs[idx - dim] = value
            return UPoly(coeffs).monic()
        ech.add(aug)
        current = op(current)
        k += 1
        if k > dim:
            raise RuntimeError("Krylov sequence did not terminate")


def minimal_polynomial(op: Callable[[Vector], Vector], basis: Sequence[Vector], dim: int) -> UPoly:
    """Minimal polynomial of op restricted to the invariant span of ``basis``."""
    result = UPoly([ONE])
    for vec in basis:
        if apply_polynomial(result, op, vec):
            result = upoly_lcm(result, vector_minimal_polynomial(op, vec, dim))
    return result


def _recognize_real(x: mpmath.mpf) -> tuple[Fraction, Fraction] | None:
    """Write x = p + q*sqrt2 with small rationals, if possible."""
    if abs(x) < mpmath.mpf(10) ** (-30):
        return Fraction(0), Fraction(0)
    frac = Fraction(str(mpmath.nstr(x, 40))).limit_denominator(10**6)
    if abs(mpmath.mpf(frac.numerator) / frac.denominator - x) < mpmath.mpf(10) ** (-25):
        return frac, Fraction(0)
    rel = mpmath.pslq([x, 1, mpmath.sqrt(2)], maxcoeff=10**8, maxsteps=10**5)
    if rel is None or rel[0] == 0:
        return None
    return Fraction(-rel[1], rel[0]), Fraction(-rel[2], rel[0])


def roots_in_field(poly: UPoly) -> list[tuple[Scalar, int]] | None:
    """Roots of poly with multiplicity if they all lie in Q(i, sqrt 2), else None."""
    if poly.degree <= 0:
        return []
    remaining = poly.monic()
    found: dict = {}
    with mpmath.workdps(60):
        coeffs = []
        s2 = mpmath.sqrt(2)
        for c in reversed(remaining.coeffs):
            a, b, cc, d = c.components()
            coeffs.append(
                mpmath.mpc(
                    mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(cc.numerator) / cc.denominator * s2,
                    mpmath.mpf(b.numerator) / b.denominator + mpmath.mpf(d.numerator) / d.denominator * s2,
                )
            )
        try:
            approx = mpmath.polyroots(coeffs, maxsteps=400, extraprec=400)
        except mpmath.libmp.libhyper.NoConvergence:
            return None
        if not isinstance(approx, (list, tuple)):
            approx = [approx]
        for z in approx:
            re = _recognize_real(mpmath.re(z))
            im = _recognize_real(mpmath.im(z))
            if re is None or im is None:
                return None
            cand = Scalar(re[0], im[0], re[1], im[1])
            if cand in found:
                continue
            mult = 0
            while True:
                q, r = remaining.divmod(linear_factor(cand))
                if not r.is_zero():
                    break
                remaining = q
                mult += 1
            if mult == 0:
                return None
            found[cand] = mult
    if remaining.degree > 0:
        return None
    return sorted(found.items(), key=lambda item: (-item[0].to_complex().real, -item[0].to_complex().imag))
