"""Exact weights: rationals and sparse multivariate polynomials over them.

Plain weights are Python ints or Fractions. Polynomials appear only when a
cardinality constraint needs an indeterminate; they share a Registry that
names the indeterminates and optionally caps their degrees (terms above the
cap are dropped, i.e. we compute in Q[z]/(z^(cap+1))).
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


class RegistryMismatch(ValueError):
    pass


def canon(q):
    """Integer-valued Fractions collapse to int so the hot path stays on ints."""
    if isinstance(q, Fraction) and q.denominator == 1:
        return q.numerator
    return q


def parse_rational(text):
    text = text.strip()
    if "/" in text:
        p, q = text.split("/", 1)
        return canon(Fraction(int(p), int(q)))
    return canon(Fraction(text))


def format_rational(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_weight(v):
    """Rationals as p/q, polynomials in their sparse form."""
    return repr(v) if isinstance(v, Poly) else format_rational(v)


@dataclass(frozen=True)
class Registry:
    names: tuple = ()
    caps: tuple = None  # per-indeterminate max degree, or None

    def __post_init__(self):
        if self.caps is not None and len(self.caps) != len(self.names):
            raise ValueError("caps must match names")
        object.__setattr__(self, "zero_key", (0,) * len(self.names))

    def __len__(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)

    def zero_exp(self):
        return (0,) * len(self.names)

    def unit(self, name, power=1):
        i = self.index(name)
        exp = tuple(power if j == i else 0 for j in range(len(self.names)))
        return Poly(self, {exp: 1})

    def const(self, c):
        return Poly(self, {self.zero_exp(): c} if c else {})

    def fits(self, exp):
        if self.caps is None:
            return True
        return all(cap is None or e <= cap for e, cap in zip(exp, self.caps))


class Poly:
    """Sparse polynomial: exponent tuple -> nonzero rational coefficient."""

    __slots__ = ("reg", "terms")

    def __init__(self, reg, terms=None):
        self.reg = reg
        t = {}
        if terms:
            for e, c in terms.items():
                if c and reg.fits(e):
                    t[e] = canon(c)
        self.terms = t

    @classmethod
    def _raw(cls, reg, terms):
        p = cls.__new__(cls)
        p.reg = reg
        p.terms = terms
        return p

    def _lift(self, other):
        t = type(other)
        if t is Poly:
            if other.reg is not self.reg and other.reg != self.reg:
                raise RegistryMismatch(f"{self.reg.names} vs {other.reg.names}")
            return other
        if t is int or t is Fraction or isinstance(other, Rational):
            return self.reg.const(other)
        return NotImplemented

    def __add__(self, other):
        t = type(other)
        if t is int or t is Fraction:
            if not other:
                return self
            other = self.reg.const(other)
        else:
            other = self._lift(other)
            if other is NotImplemented:
                return other
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = t.get(e, 0) + c
            if v:
                t[e] = v
            else:
                t.pop(e, None)
        return Poly._raw(self.reg, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.reg, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, c):
        if not c:
            return Poly._raw(self.reg, {})
        if c == 1:
            return self
        return Poly._raw(self.reg, {e: canon(v * c) for e, v in self.terms.items()})

    def __mul__(self, other):
        to = type(other)
        if to is int or to is Fraction:
            return self._scale(other)
        if to is not Poly:
            if isinstance(other, Rational):
                return self._scale(other)
            other = self._lift(other)
            if other is NotImplemented:
                return other
        elif other.reg is not self.reg and other.reg != self.reg:
            raise RegistryMismatch(f"{self.reg.names} vs {other.reg.names}")
        reg = self.reg
        a, b = self.terms, other.terms
        # constants are common in the DP: scale instead of convolving
        zero = reg.zero_key
        if len(b) == 1 and zero in b:
            return self._scale(b[zero])
        if len(a) == 1 and zero in a:
            return other._scale(a[zero])
        t = {}
        if len(reg.names) == 1:
            cap = reg.caps[0] if reg.caps is not None else None
            for (i,), c1 in a.items():
                for (j,), c2 in b.items():
                    k = i + j
                    if cap is not None and k > cap:
                        continue
                    e = (k,)
                    v = t.get(e, 0) + c1 * c2
                    if v:
                        t[e] = v
                    else:
                        del t[e]
            return Poly._raw(reg, t)
        caps = reg.caps
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                if caps is not None and not reg.fits(e):
                    continue
                v = t.get(e, 0) + c1 * c2
                if v:
                    t[e] = v
                else:
                    del t[e]
        return Poly._raw(reg, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            return Poly._raw(self.reg, {e: canon(Fraction(c) / other) for e, c in self.terms.items()})
        return NotImplemented

    def __pow__(self, e):
        return power(self, e)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.reg == other.reg and self.terms == other.terms
        if isinstance(other, Rational):
            if not other:
                return not self.terms
            return self.terms == {self.reg.zero_exp(): other}
        return NotImplemented

    def __hash__(self):
        return hash((self.reg, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, exp):
        return self.terms.get(tuple(exp), 0)

    def evaluate(self, values):
        total = 0
        for e, c in self.terms.items():
            term = Fraction(c)
            for v, k in zip(values, e):
                term *= Fraction(v) ** k
            total += term
        return canon(total)

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(self.reg.names, e) if k
            )
            if not mono:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        return " + ".join(parts)


def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def power(a, e):
    if e < 0:
        raise ValueError("negative exponent")
    if isinstance(a, Poly):
        result = a.reg.const(1)
    else:
        result = 1
    base = a
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    return result


def coefficient_of(a, exponents):
    """Coefficient of the monomial with the given exponent vector (0 if absent)."""
    exponents = tuple(exponents)
    if isinstance(a, Poly):
        if len(exponents) != len(a.reg):
            raise RegistryMismatch("exponent vector does not match registry")
        return a.coefficient(exponents)
    if any(exponents):
        return 0
    return canon(Fraction(a))
