"""Finite graded Poincare duality algebras (the role of the cohomology of M).

A :class:`PDAlgebra` is loaded from structure constants and validated on
construction: graded commutativity, associativity, unit axioms and
non-degeneracy of the pairing ``<a, b> = (-1)^{|a|} I(a*b)`` on complementary
degrees, where ``I`` is the integration functional supported in the top
degree.  Built-in constructors cover spheres and the 2-torus.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence

from .scalars import ZERO, ONE, format_scalar, parse_scalar


class PDAlgebraError(ValueError):
    """Raised when a loaded algebra violates a Poincare duality axiom."""


@dataclass(frozen=True)
class PDElement:
    """Element given by its coefficient vector over the algebra basis."""

    algebra: "PDAlgebra"
    coeffs: tuple

    def __add__(self, other: "PDElement") -> "PDElement":
        return PDElement(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "PDElement":
        return PDElement(self.algebra, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "PDElement":
        return PDElement(self.algebra, tuple(c * a for a in self.coeffs))

    def __mul__(self, other: "PDElement") -> "PDElement":
        A = self.algebra
        out = [ZERO] * len(A.degrees)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if not b:
                    continue
                for k, c in A.product_table[i][j]:
                    out[k] += a * b * c
        return PDElement(A, tuple(out))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def degree(self) -> int:
        """Cohomological degree; raises on inhomogeneous or zero elements."""
        degs = {self.algebra.degrees[i] for i, c in enumerate(self.coeffs) if c}
        if len(degs) != 1:
            raise PDAlgebraError(f"element is not homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def __repr__(self):
        terms = [
            f"{format_scalar(c)}*{self.algebra.names[i]}" for i, c in enumerate(self.coeffs) if c
        ]
        return " + ".join(terms) if terms else "0"


class PDAlgebra:
    """Graded commutative algebra with a non-degenerate top-degree pairing.

    ``product_table[i][j]`` lists ``(k, c)`` with ``a_i a_j = sum c * a_k``.
    ``integration`` is the linear functional; it must vanish outside degree
    ``dimension`` and make the pairing matrix invertible.
    """

    def __init__(
        self,
        dimension: int,
        names: Sequence[str],
        degrees: Sequence[int],
        unit_index: int,
        product_table: List[List[List[tuple]]],
        integration: Sequence[Fraction],
        name: str = "custom",
    ):
        self.dimension = dimension
        self.names = list(names)
        self.degrees = list(degrees)
        self.unit_index = unit_index
        self.product_table = product_table
        self.integration = list(integration)
        self.name = name
        self.index_of: Dict[str, int] = {nm: i for i, nm in enumerate(names)}
        self._validate()
        self.reduced_indices = [i for i in range(len(names)) if i != unit_index]
        self._duals = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_json(cls, data: dict) -> "PDAlgebra":
        names = [b["name"] for b in data["basis"]]
        degrees = [int(b["degree"]) for b in data["basis"]]
        if data["unit"] not in names:
            raise PDAlgebraError(f"unit {data['unit']!r} not among basis names")
        unit_index = names.index(data["unit"])
        m = len(names)
        table = [[[] for _ in range(m)] for _ in range(m)]
        seen = set()
        for i, j, coeffs in data["products"]:
            seen.add((i, j))
            table[i][j] = [(k, parse_scalar(str(c))) for k, c in enumerate(coeffs) if parse_scalar(str(c))]
        # unit products are implied when omitted
        for i in range(m):
            for j in range(m):
                if (i, j) in seen:
                    continue
                if i == unit_index:
                    table[i][j] = [(j, ONE)]
                elif j == unit_index:
                    table[i][j] = [(i, ONE)]
        integration = [parse_scalar(str(c)) for c in data["integration"]]
        return cls(int(data["dimension"]), names, degrees, unit_index, table,
                   integration, name=data.get("name", "custom"))

    def to_json(self) -> dict:
        products = []
        m = len(self.names)
        for i in range(m):
            for j in range(m):
                coeffs = [ZERO] * m
                for k, c in self.product_table[i][j]:
                    coeffs[k] = c
                products.append([i, j, [format_scalar(c) for c in coeffs]])
        return {
            "name": self.name,
            "dimension": self.dimension,
            "basis": [{"name": nm, "degree": d} for nm, d in zip(self.names, self.degrees)],
            "unit": self.names[self.unit_index],
            "products": products,
            "integration": [format_scalar(c) for c in self.integration],
        }

    # -- validation --------------------------------------------------------

    def _validate(self):
        m = len(self.names)
        if len(self.degrees) != m or len(self.integration) != m:
            raise PDAlgebraError("basis/degrees/integration length mismatch")
        if self.degrees[self.unit_index] != 0:
            raise PDAlgebraError("unit must sit in degree 0")
        for i, val in enumerate(self.integration):
            if val and self.degrees[i] != self.dimension:
                raise PDAlgebraError(
                    f"integration hits {self.names[i]} outside top degree {self.dimension}")
        basis = [self.basis_element(i) for i in range(m)]
        for i in range(m):
            u = basis[self.unit_index] * basis[i]
            if u.coeffs != basis[i].coeffs:
                raise PDAlgebraError(f"unit does not act as identity on {self.names[i]}")
            for j in range(m):
                ab = basis[i] * basis[j]
                for k, c in enumerate(ab.coeffs):
                    if c and self.degrees[k] != self.degrees[i] + self.degrees[j]:
                        raise PDAlgebraError(
                            f"product {self.names[i]}*{self.names[j]} is not graded")
                sign = -1 if (self.degrees[i] % 2 and self.degrees[j] % 2) else 1
                ba = (basis[j] * basis[i]).scale(Fraction(sign))
                if ab.coeffs != ba.coeffs:
                    raise PDAlgebraError(
                        f"product not graded-commutative on {self.names[i]},{self.names[j]}")
                for k in range(m):
                    left = (basis[i] * basis[j]) * basis[k]
                    right = basis[i] * (basis[j] * basis[k])
                    if left.coeffs != right.coeffs:
                        raise PDAlgebraError(
                            f"product not associative on "
                            f"{self.names[i]},{self.names[j]},{self.names[k]}")
        if _det(self.pairing_matrix()) == 0:
            raise PDAlgebraError("pairing matrix is degenerate")

    # -- operations ---------------------------------------------------------

    def basis_element(self, i: int) -> PDElement:
        coeffs = [ZERO] * len(self.names)
        coeffs[i] = ONE
        return PDElement(self, tuple(coeffs))

    @property
    def unit(self) -> PDElement:
        return self.basis_element(self.unit_index)

    def integrate(self, a: PDElement) -> Fraction:
        return sum((c * self.integration[i] for i, c in enumerate(a.coeffs)), ZERO)

    def pairing(self, a: PDElement, b: PDElement) -> Fraction:
        """<a, b> = (-1)^{|a|} I(a*b); zero unless degrees are complementary."""
        if a.is_zero() or b.is_zero():
            return ZERO
        sign = -1 if a.degree() % 2 else 1
        return sign * self.integrate(a * b)

    def pairing_matrix(self) -> List[List[Fraction]]:
        m = len(self.names)
        basis = [self.basis_element(i) for i in range(m)]
        return [[self.pairing(basis[i], basis[j]) for j in range(m)] for i in range(m)]

    def dual_basis(self) -> List[PDElement]:
        """Elements a*_j with pairing(a_i, a*_j) = delta_ij."""
        if self._duals is None:
            m = len(self.names)
            P = self.pairing_matrix()
            inv = _invert(P)
            # column j of inv gives the coefficients of a*_j
            self._duals = [
                PDElement(self, tuple(inv[i][j] for i in range(m))) for j in range(m)
            ]
        return self._duals

    def __repr__(self):
        return f"PDAlgebra({self.name}, dim={self.dimension}, basis={self.names})"


def _det(matrix: List[List[Fraction]]) -> Fraction:
    m = [row[:] for row in matrix]
    size = len(m)
    det = ONE
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col]), None)
        if pivot is None:
            return ZERO
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, size):
            factor = m[r][col] / m[col][col]
            for c in range(col, size):
                m[r][c] -= factor * m[col][c]
    return det


def _invert(matrix: List[List[Fraction]]) -> List[List[Fraction]]:
    size = len(matrix)
    m = [row[:] + [ONE if i == j else ZERO for j in range(size)] for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col]), None)
        if pivot is None:
            raise PDAlgebraError("pairing matrix is singular")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [c / p for c in m[col]]
        for r in range(size):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[size:] for row in m]


def sphere(n: int) -> PDAlgebra:
    """H*(S^n): unit and a volume class v in degree n with v*v = 0, I(v) = 1."""
    table = [
        [[(0, ONE)], [(1, ONE)]],
        [[(1, ONE)], []],
    ]
    return PDAlgebra(n, ["1", "v"], [0, n], 0, table, [ZERO, ONE], name=f"sphere{n}")


def torus() -> PDAlgebra:
    """H*(T^2): generators a, b in degree 1, ab = -ba the top class t, I(t) = 1."""
    one = ONE
    # basis 1, a, b, t with a*a = b*b = 0, a*b = t, b*a = -t, a*t = t*a = 0 ...
    table = [
        [[(0, one)], [(1, one)], [(2, one)], [(3, one)]],
        [[(1, one)], [], [(3, one)], []],
        [[(2, one)], [(3, -one)], [], []],
        [[(3, one)], [], [], []],
    ]
    return PDAlgebra(2, ["1", "a", "b", "t"], [0, 1, 1, 2], 0, table,
                     [ZERO, ZERO, ZERO, ONE], name="torus")


_BUILTIN = {"sphere": sphere, "torus": torus}


def load_algebra(selector: str, n: int | None = None) -> PDAlgebra:
    """Resolve --algebra style selectors: sphere | torus | file:PATH."""
    if selector == "sphere":
        return sphere(n if n is not None else 2)
    if selector == "torus":
        return torus()
    if selector.startswith("file:"):
        import json

        with open(selector[5:]) as fh:
            return PDAlgebra.from_json(json.load(fh))
    raise PDAlgebraError(f"unknown algebra selector {selector!r}")
