"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial over species counts ``k = (k_1, ..., k_n)`` is stored as a map
from exponent tuples to :class:`fractions.Fraction` coefficients.  The same
type is used for propensities and for moment derivatives, where a monomial
``k^u`` stands for the moment ``E[S^u]``.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

MultiIndex = tuple[int, ...]


def order(v: Iterable[int]) -> int:
    """Sum of the entries of a multi-index."""
    return sum(v)


def unit(n: int, i: int, power: int = 1) -> MultiIndex:
    return tuple(power if t == i else 0 for t in range(n))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("polynomial coefficients must be exact (int or Fraction)")
    return Fraction(c)


class Poly:
    """Polynomial in ``nvars`` variables; zero coefficients are never stored."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, object] | None = None):
        self.nvars = nvars
        self._terms: dict[MultiIndex, Fraction] = {}
        self._hash = None
        if terms:
            for mono, c in terms.items():
                mono = tuple(mono)
                if len(mono) != nvars:
                    raise ValueError(f"monomial {mono} has length {len(mono)}, expected {nvars}")
                if any(e < 0 for e in mono):
                    raise ValueError(f"negative exponent in {mono}")
                c = _as_fraction(c)
                if c:
                    self._terms[mono] = self._terms.get(mono, Fraction(0)) + c
                    if not self._terms[mono]:
                        del self._terms[mono]

    # constructors

    @classmethod
    def constant(cls, nvars: int, c=1) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exponents: Iterable[int], c=1) -> "Poly":
        exponents = tuple(exponents)
        return cls(len(exponents), {exponents: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        return cls(nvars, {unit(nvars, i): 1})

    @classmethod
    def falling_factorial(cls, nvars: int, i: int, a: int) -> "Poly":
        """``k_i (k_i - 1) ... (k_i - a + 1)``; the empty product for ``a = 0``."""
        p = cls.constant(nvars)
        x = cls.variable(nvars, i)
        for t in range(a):
            p = p * (x - t)
        return p

    # container protocol

    @property
    def terms(self) -> dict[MultiIndex, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def monomials(self) -> list[MultiIndex]:
        return sorted(self._terms)

    def coefficient(self, mono: MultiIndex) -> Fraction:
        return self._terms.get(tuple(mono), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((order(m) for m in self._terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((m[i] for m in self._terms), default=-1)

    # arithmetic

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials over different variable counts")
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._from_clean(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._from_clean(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            if not c:
                return Poly(self.nvars)
            return Poly._from_clean(self.nvars, {m: c * v for m, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[MultiIndex, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly._from_clean(self.nvars, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power")
        result = Poly.constant(self.nvars)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    @classmethod
    def _from_clean(cls, nvars: int, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # evaluation and transformation

    def __call__(self, k: Iterable) -> Fraction:
        return self.evaluate(k)

    def evaluate(self, k: Iterable):
        """Evaluate at a point; exact for int/Fraction input."""
        k = tuple(k)
        total = Fraction(0)
        for m, c in self._terms.items():
            v = c
            for x, e in zip(k, m):
                if e:
                    v *= x ** e
            total += v
        return total

    def shift(self, gamma: Iterable[int]) -> "Poly":
        """Return ``k -> P(k + gamma)``."""
        gamma = tuple(gamma)
        out = Poly(self.nvars)
        for m, c in self._terms.items():
            term = Poly.constant(self.nvars, c)
            for i, (e, g) in enumerate(zip(m, gamma)):
                if not e:
                    continue
                if not g:
                    term = term * Poly.monomial(unit(self.nvars, i, e))
                    continue
                # (k_i + g)^e by the binomial theorem
                factor = Poly(
                    self.nvars,
                    {unit(self.nvars, i, t): comb(e, t) * g ** (e - t) for t in range(e + 1)},
                )
                term = term * factor
            out = out + term
        return out

    def substitute(self, i: int, replacement: "Poly") -> "Poly":
        """Replace variable ``i`` by ``replacement`` (same variable set)."""
        replacement = self._coerce(replacement)
        out = Poly(self.nvars)
        powers = {0: Poly.constant(self.nvars)}
        for m, c in self._terms.items():
            e = m[i]
            if e not in powers:
                powers[e] = replacement ** e
            rest = m[:i] + (0,) + m[i + 1:]
            out = out + Poly.monomial(rest, c) * powers[e]
        return out

    def drop_variable(self, i: int) -> "Poly":
        """Remove variable ``i``; it must not occur in any monomial."""
        if self.degree_in(i) > 0:
            raise ValueError(f"variable {i} still occurs")
        return Poly._from_clean(
            self.nvars - 1, {m[:i] + m[i + 1:]: c for m, c in self._terms.items()}
        )

    def to_string(self, names: list[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"k{i + 1}" for i in range(self.nvars)]
        parts = []
        for m in sorted(self._terms, key=lambda m: (-order(m), tuple(-e for e in m))):
            c = self._terms[m]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
            if not factors:
                body = str(c)
            elif c == 1:
                body = "*".join(factors)
            elif c == -1:
                body = "-" + "*".join(factors)
            else:
                body = f"{c}*" + "*".join(factors)
            parts.append(body)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self.to_string()})"


def delta_poly(M: Poly, gamma: Iterable[int]) -> Poly:
    """The finite difference ``M(k + gamma) - M(k)``."""
    return M.shift(gamma) - M
