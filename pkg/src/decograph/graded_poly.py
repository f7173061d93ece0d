"""Free graded-commutative polynomial algebras with exact coefficients.

One engine serves two instantiations:

* the coordinate algebra on x_1..x_N (degree 0) and p_1..p_N (degree 1-n),
  with its shifted Poisson bracket {p_i, x_j} = delta_ij; and
* the decorated algebra on variables (class tensor y_k) used as the target of
  the graph evaluation (see :mod:`decograph.eval_map`).

Monomials are kept in a canonical sorted form; Koszul signs are produced by
counting transpositions of odd variables, and odd variables square to zero.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Dict, Iterable, Tuple

from .scalars import ONE, ZERO, Coefficient, format_scalar, is_zero, parse_scalar

Monomial = Tuple[int, ...]


class VariableSet:
    """Variables y_1..y_2N: x_i of degree 0, p_i of degree 1-n.

    Indices 0..N-1 are x_1..x_N and N..2N-1 are p_1..p_N; this index order is
    the monomial normal order.  ``conjugate`` swaps x_i and p_i (the only
    pairs with a nonzero bracket).
    """

    def __init__(self, N: int, n: int):
        if N < 1 or n < 1:
            raise ValueError("need N >= 1 and n >= 1")
        self.N = N
        self.n = n

    def degree(self, idx: int) -> int:
        return 0 if idx < self.N else 1 - self.n

    def name(self, idx: int) -> str:
        return f"x{idx + 1}" if idx < self.N else f"p{idx - self.N + 1}"

    def size(self) -> int:
        return 2 * self.N

    def index(self, name: str) -> int:
        m = re.fullmatch(r"([xp])(\d+)", name)
        if not m or not (1 <= int(m.group(2)) <= self.N):
            raise KeyError(f"unknown variable {name!r}")
        k = int(m.group(2)) - 1
        return k if m.group(1) == "x" else self.N + k

    def conjugate(self, idx: int) -> int:
        return idx + self.N if idx < self.N else idx - self.N

    def is_x(self, idx: int) -> bool:
        return idx < self.N

    def bracket_constant(self, u: int, w: int) -> Fraction:
        """{y_u, y_w} on generators: {p_i, x_i} = 1 and {x_i, p_i} = -1.

        For odd n this is the stated convention {x, p} = (-1)^n {p, x}; for
        even n the (-1)^n form breaks the graded Jacobi identity (and with it
        every square-zero property downstream), so the shifted-antisymmetric
        value -1 is used for all n.
        """
        if self.conjugate(u) != w:
            return ZERO
        return ONE if not self.is_x(u) else -ONE

    def __eq__(self, other):
        return isinstance(other, VariableSet) and (self.N, self.n) == (other.N, other.n)

    def __hash__(self):
        return hash(("VariableSet", self.N, self.n))

    def __repr__(self):
        return f"VariableSet(N={self.N}, n={self.n})"


def _merge_monomials(m1: Monomial, m2: Monomial, parity: Callable[[int], int]):
    """Sort the concatenation m1+m2, returning (monomial, sign) or (None, 0).

    The sign counts transpositions of odd variables; a repeated odd variable
    kills the product.
    """
    sign = 1
    out = []
    i = j = 0
    odd_left = sum(parity(v) for v in m1)  # odd vars of m1 not yet consumed
    # walk both sorted lists; an element taken from m2 jumps past m1[i:]
    while i < len(m1) and j < len(m2):
        if m1[i] <= m2[j]:
            odd_left -= parity(m1[i])
            out.append(m1[i])
            i += 1
        else:
            if parity(m2[j]) and odd_left % 2:
                sign = -sign
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    mono = tuple(out)
    for a, b in zip(mono, mono[1:]):
        if a == b and parity(a):
            return None, 0
    return mono, sign


class Polynomial:
    """Element of the free graded-commutative algebra on a variable set.

    ``universe`` only needs ``degree(idx)``, ``name(idx)`` and hashability;
    coefficients are Fractions or HbarSeries.
    """

    __slots__ = ("universe", "terms")

    def __init__(self, universe, terms: Dict[Monomial, Coefficient] | None = None):
        self.universe = universe
        self.terms: Dict[Monomial, Coefficient] = {}
        if terms:
            for mono, c in terms.items():
                if not is_zero(c):
                    self.terms[mono] = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, universe) -> "Polynomial":
        return cls(universe)

    @classmethod
    def constant(cls, universe, c) -> "Polynomial":
        return cls(universe, {(): Fraction(c) if isinstance(c, int) else c})

    @classmethod
    def variable(cls, universe, idx: int) -> "Polynomial":
        return cls(universe, {(idx,): ONE})

    @classmethod
    def monomial(cls, universe, indices: Iterable[int], coeff=ONE) -> "Polynomial":
        out = cls.constant(universe, coeff)
        for idx in indices:
            out = out * cls.variable(universe, idx)
        return out

    # -- ring structure ------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.universe != other.universe:
            raise ValueError("polynomials over different variable sets")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            acc = out.get(mono, ZERO) + c
            if is_zero(acc):
                out.pop(mono, None)
            else:
                out[mono] = acc
        return Polynomial(self.universe, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.universe, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        if is_zero(c):
            return Polynomial.zero(self.universe)
        return Polynomial(self.universe, {m: c * co for m, co in self.terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        parity = self._parity
        out: Dict[Monomial, Coefficient] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono, sign = _merge_monomials(m1, m2, parity)
                if mono is None:
                    continue
                acc = out.get(mono, ZERO) + sign * c1 * c2
                if is_zero(acc):
                    out.pop(mono, None)
                else:
                    out[mono] = acc
        return Polynomial(self.universe, out)

    def _parity(self, idx: int) -> int:
        return self.universe.degree(idx) % 2

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.universe == other.universe and self.terms == other.terms

    def __hash__(self):
        return hash((self.universe, frozenset(self.terms.items())))

    # -- grading -------------------------------------------------------------

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(self.universe.degree(v) for v in mono)

    def degrees(self) -> set:
        return {self.monomial_degree(m) for m in self.terms}

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError(f"polynomial not homogeneous (degrees {sorted(degs)})")
        return degs.pop()

    def parity(self) -> int:
        return self.degree() % 2

    def homogeneous_parts(self) -> Dict[int, "Polynomial"]:
        parts: Dict[int, Polynomial] = {}
        for mono, c in self.terms.items():
            d = self.monomial_degree(mono)
            parts.setdefault(d, Polynomial.zero(self.universe)).terms[mono] = c
        return parts

    def variable_count(self) -> int:
        """Total number of variable occurrences; must be uniform over terms."""
        counts = {len(m) for m in self.terms}
        if len(counts) > 1:
            raise ValueError("mixed word lengths")
        return counts.pop() if counts else 0

    # -- derivations -----------------------------------------------------------

    def derivative(self, idx: int) -> "Polynomial":
        """Left derivation d/dy: signs accumulate past variables to the left."""
        par = self._parity(idx)
        out: Dict[Monomial, Coefficient] = {}
        for mono, c in self.terms.items():
            left_parity = 0
            for pos, v in enumerate(mono):
                if v == idx:
                    sign = -1 if (par and left_parity % 2) else 1
                    rest = mono[:pos] + mono[pos + 1:]
                    acc = out.get(rest, ZERO) + sign * c
                    if is_zero(acc):
                        out.pop(rest, None)
                    else:
                        out[rest] = acc
                left_parity += self._parity(v)
        return Polynomial(self.universe, out)

    def right_derivative(self, idx: int) -> "Polynomial":
        """Right derivation: signs accumulate past variables to the right."""
        par = self._parity(idx)
        out: Dict[Monomial, Coefficient] = {}
        for mono, c in self.terms.items():
            for pos, v in enumerate(mono):
                if v == idx:
                    right_parity = sum(self._parity(w) for w in mono[pos + 1:])
                    sign = -1 if (par and right_parity % 2) else 1
                    rest = mono[:pos] + mono[pos + 1:]
                    acc = out.get(rest, ZERO) + sign * c
                    if is_zero(acc):
                        out.pop(rest, None)
                    else:
                        out[rest] = acc
        return Polynomial(self.universe, out)

    def second_order(self, table: Dict[Tuple[int, int], Coefficient]) -> "Polynomial":
        """sum w(a,b) * d/da (d/db (self)) over the contraction table."""
        out = Polynomial.zero(self.universe)
        present = {v for m in self.terms for v in m}
        for (a, b), w in table.items():
            if a in present and b in present:
                out = out + self.derivative(b).derivative(a).scale(w)
        return out

    # -- display / io ------------------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            names = "*".join(self.universe.name(v) for v in mono) or "1"
            cs = format_scalar(c) if isinstance(c, Fraction) else f"({c!r})"
            parts.append(names if c == 1 else f"{cs}*{names}")
        return " + ".join(parts)

    def to_json(self) -> list:
        out = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            cj = format_scalar(c) if isinstance(c, Fraction) else c.to_json()
            out.append({"monomial": [self.universe.name(v) for v in mono], "coefficient": cj})
        return out


# -- the Poisson structure on the coordinate algebra ---------------------------


def kappa_contract(f: Polynomial, g: Polynomial,
                   table: Dict[Tuple[int, int], Coefficient]) -> Polynomial:
    """Biderivation sum_{(u,w)} (-1)^{|u||f|} c(u,w) (df/du)(dg/dw).

    The factor (-1)^{|u||f|} per homogeneous part of f is exactly what makes
    the extension of the generator table shifted-antisymmetric and satisfy
    the graded Jacobi identity with shifted parities |f| + n - 1.
    """
    if f.universe != g.universe:
        raise ValueError("bracket of polynomials over different variable sets")
    out = Polynomial.zero(f.universe)
    g_vars = {v for m in g.terms for v in m}
    for F, fpart in f.homogeneous_parts().items():
        f_vars = {v for m in fpart.terms for v in m}
        for (u, w), c in table.items():
            if u not in f_vars or w not in g_vars:
                continue
            sign = -1 if (f.universe.degree(u) % 2 and F % 2) else 1
            out = out + (fpart.derivative(u) * g.derivative(w)).scale(sign * c)
    return out


def bracket_table(vs: VariableSet) -> Dict[Tuple[int, int], Fraction]:
    """Contraction table entries c(u,w) with (-1)^{|u|} c(u,w) = {y_u, y_w}.

    kappa_contract multiplies each term by (-1)^{|u||f|}, so on the
    generators themselves it produces (-1)^{|u|} c(u,w); the table therefore
    stores the realized bracket constants pre-divided by that factor.
    """
    table = {}
    for u in range(vs.size()):
        w = vs.conjugate(u)
        c = vs.bracket_constant(u, w)
        if c:
            sign = -1 if vs.degree(u) % 2 else 1
            table[(u, w)] = sign * c
    return table


def poisson_bracket(f: Polynomial, g: Polynomial) -> Polynomial:
    """{f, g} on the coordinate algebra.

    Satisfies {f,g} = -(-1)^{(|f|+n-1)(|g|+n-1)} {g,f}, the matching Leibniz
    rule and graded Jacobi; for odd n this coincides with the symmetry
    (-1)^{n+|f||g|} stated on the generators.
    """
    vs = f.universe
    if not isinstance(vs, VariableSet):
        raise TypeError("poisson_bracket expects coordinate-algebra polynomials")
    return kappa_contract(f, g, bracket_table(vs))


def is_maurer_cartan(m: Polynomial) -> bool:
    """True iff {m, m} = 0 exactly (order by order for hbar coefficients)."""
    return poisson_bracket(m, m).is_zero()


def twist_differential(m: Polynomial) -> Callable[[Polynomial], Polynomial]:
    """d^m = -{m, .}; refuses unsound twists.

    Besides {m, m} = 0, square-zero-ness of d^m needs the shifted parity of m
    to be odd (|m| = n mod 2); even-parity solutions of {m, m} = 0 exist but
    do not give differentials, so they are rejected here.
    """
    if not is_maurer_cartan(m):
        raise ValueError("twist element does not satisfy {m, m} = 0")
    for mono in m.terms:
        if (m.monomial_degree(mono) - m.universe.n) % 2:
            raise ValueError("twist element has terms of parity != n mod 2; "
                             "d^m would not square to zero")

    def d(f: Polynomial) -> Polynomial:
        return -poisson_bracket(m, f)

    return d


# -- text parser -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*([+-]|\d+/\d+|\d+|[xp]\d+|\*)")


def parse_polynomial(text: str, vs: VariableSet) -> Polynomial:
    """Parse expressions like "3/2 * x1*p2 - p1*p1 + 2"."""
    out = Polynomial.zero(vs)
    pos = 0
    sign = ONE
    coeff = None
    factors: list[int] = []

    def flush():
        nonlocal coeff, factors, sign, out
        if coeff is None and not factors:
            return
        c = sign * (coeff if coeff is not None else ONE)
        out = out + Polynomial.monomial(vs, factors, c)
        coeff, factors, sign = None, [], ONE

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"parse error at {text[pos:]!r}")
            break
        tok = m.group(1)
        pos = m.end()
        if tok in "+-":
            flush()
            sign = ONE if tok == "+" else -ONE
        elif tok == "*":
            continue
        elif tok[0] in "xp" and len(tok) > 1:
            factors.append(vs.index(tok))
        else:
            c = parse_scalar(tok)
            coeff = c if coeff is None else coeff * c
    flush()
    return out
