"""Multivariate polynomials over Q(i, sqrt 2) and a small expression parser.

Polynomials are used for matrix templates in catalog files, for exact
coordinate expressions of solutions and for the canonical scalar text form.
The parser understands integers, the units ``i`` and ``r2`` (sqrt 2),
variable names, ``+ - * / ^`` and parentheses. Division is only allowed by
constants.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping

from .field import ONE, ZERO, Scalar

Monomial = tuple  # sorted tuple of (variable, exponent)


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for var, exp in m2:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


def _var_order_key(name: str):
    match = re.fullmatch(r"([A-Za-z_]+)(\d+)", name)
    if match:
        return (match.group(1), int(match.group(2)))
    return (name, -1)


class Polynomial:
    """Immutable polynomial: mapping from monomials to nonzero Scalars."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff:
                    clean[mono] = coeff
        object.__setattr__(self, "terms", clean)

    @staticmethod
    def constant(value) -> "Polynomial":
        return Polynomial({(): Scalar.coerce(value)})

    @staticmethod
    def variable(name: str) -> "Polynomial":
        return Polynomial({((name, 1),): ONE})

    @staticmethod
    def coerce(value) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        return Polynomial.constant(value)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not mono for mono in self.terms)

    def constant_term(self) -> Scalar:
        return self.terms.get((), ZERO)

    def variables(self) -> set[str]:
        return {var for mono in self.terms for var, _ in mono}

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(exp for _, exp in mono) for mono in self.terms)

    def coefficient(self, monomial: Monomial) -> Scalar:
        return self.terms.get(tuple(sorted(monomial)), ZERO)

    def linear_coefficient(self, var: str) -> Scalar:
        return self.terms.get(((var, 1),), ZERO)

    def linear_part(self, variables: Iterable[str]) -> dict[str, Scalar]:
        """Coefficients of a polynomial that must be linear homogeneous in ``variables``."""
        allowed = set(variables)
        out = {}
        for mono, coeff in self.terms.items():
            if len(mono) != 1 or mono[0][1] != 1 or mono[0][0] not in allowed:
                raise ValueError(f"expression {self} is not linear in {sorted(allowed)}")
            out[mono[0][0]] = coeff
        return out

    def __add__(self, other):
        other = Polynomial.coerce(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            terms[mono] = terms.get(mono, ZERO) + coeff
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other):
        return Polynomial.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (Scalar, int)):
            s = Scalar.coerce(other)
            return Polynomial({m: c * s for m, c in self.terms.items()})
        other = Polynomial.coerce(other)
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(m1, m2)
                terms[mono] = terms.get(mono, ZERO) + c1 * c2
        return Polynomial(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        divisor = Polynomial.coerce(other)
        if not divisor.is_constant():
            raise ValueError("division by a non-constant polynomial")
        inv = divisor.constant_term().inverse()
        return self * inv

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Polynomial.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (Polynomial, Scalar, int)):
            return self.terms == Polynomial.coerce(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def conj_i(self) -> "Polynomial":
        return Polynomial({m: c.conj_i() for m, c in self.terms.items()})

    def substitute(self, values: Mapping[str, "Polynomial | Scalar | int"]) -> "Polynomial":
        """Exact substitution of polynomials or scalars for variables."""
        result = Polynomial()
        for mono, coeff in self.terms.items():
            term = Polynomial.constant(coeff)
            for var, exp in mono:
                if var in values:
                    term = term * (Polynomial.coerce(values[var]) ** exp)
                else:
                    term = term * Polynomial({((var, exp),): ONE})
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, complex | float]) -> complex:
        """Floating point evaluation."""
        total = 0j
        for mono, coeff in self.terms.items():
            term = coeff.to_complex()
            for var, exp in mono:
                term *= values[var] ** exp
            total += term
        return total

    def derivative(self, var: str) -> "Polynomial":
        terms: dict = {}
        for mono, coeff in self.terms.items():
            powers = dict(mono)
            exp = powers.get(var, 0)
            if not exp:
                continue
            if exp == 1:
                del powers[var]
            else:
                powers[var] = exp - 1
            new = tuple(sorted(powers.items()))
            terms[new] = terms.get(new, ZERO) + coeff * exp
        return Polynomial(terms)

    def _sorted_terms(self):
        def key(item):
            mono = item[0]
            degree = sum(exp for _, exp in mono)
            return (degree, [(_var_order_key(v), e) for v, e in mono])

        return sorted(self.terms.items(), key=key)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mono, coeff in self._sorted_terms():
            mono_text = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            coeff_text = str(coeff)
            compound = " " in coeff_text.strip("-") or ("+" in coeff_text)
            if not mono:
                body = coeff_text if not compound else f"({coeff_text})"
            elif coeff == ONE:
                body = mono_text
            elif coeff == -ONE:
                body = "-" + mono_text
            elif compound:
                body = f"({coeff_text})*{mono_text}"
            else:
                body = f"{coeff_text}*{mono_text}"
            pieces.append(body)
        out = pieces[0]
        for piece in pieces[1:]:
            if piece.startswith("-"):
                out += " - " + piece[1:]
            else:
                out += " + " + piece
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ValueError(f"unexpected character in expression {text!r} at {pos}")
        number, name, op = match.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", "^" if op == "**" else op))
        pos = match.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ValueError("empty expression")
        value = self.sum()
        if self.pos != len(self.tokens):
            raise ValueError(f"trailing input in expression {self.text!r}")
        return value

    def sum(self) -> Polynomial:
        value = self.product()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def product(self) -> Polynomial:
        value = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            _, op = self.take()
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self) -> Polynomial:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, tok = self.take()
            if kind != "num":
                raise ValueError(f"exponent must be an integer in {self.text!r}")
            return base ** int(tok)
        return base

    def atom(self) -> Polynomial:
        kind, tok = self.take()
        if kind == "num":
            return Polynomial.constant(int(tok))
        if kind == "name":
            if tok == "i":
                return Polynomial.constant(Scalar(0, 1))
            if tok in ("r2", "sqrt2"):
                return Polynomial.constant(Scalar(0, 0, 1))
            return Polynomial.variable(tok)
        if (kind, tok) == ("op", "("):
            value = self.sum()
            if self.take() != ("op", ")"):
                raise ValueError(f"unbalanced parentheses in {self.text!r}")
            return value
        raise ValueError(f"unexpected token {tok!r} in {self.text!r}")


def parse_polynomial(text) -> Polynomial:
    if isinstance(text, (int,)):
        return Polynomial.constant(text)
    return _Parser(str(text)).parse()


def parse_scalar(text) -> Scalar:
    if isinstance(text, Scalar):
        return text
    if isinstance(text, int):
        return Scalar(text)
    return Scalar.parse(str(text))
