"""Decorated graphs with external/internal vertices and their differentials.

Conventions (fixed here, validated by the d-squared test suites):

* Vertices are 1-based: externals 1..r, internals r+1..r+s.  For odd n the
  list position of the internal vertices is the orientation order (internal
  vertices are odd); for even n the position of an edge in the edge tuple is
  the orientation order (edges are odd).  Odd decorations are ordered by
  their position in the decoration tuple for both parities.
* For odd n every edge is directed and flipping a direction costs (-1)^n;
  canonical form directs edges small-to-large vertex.  Self-loops are
  therefore zero for odd n.  For even n a repeated edge is zero.
* Graph degree: n*s - (n-1)*e - sum of decoration degrees.  Decorations
  enter homologically (negatively); this is what makes both vertex splitting
  and decoration pairing raise the degree by exactly one.
* Vertex splitting appends the new internal vertex at the end of the
  internal order and the new edge (old vertex -> new vertex) at the end of
  the edge order.  When splitting an internal vertex the reconnection sum
  skips the empty reassignment (the two resulting vertices are
  indistinguishable, so that configuration is already counted by the full
  reassignment); splitting squares to zero only with this rule.
* Decoration pairing contracts two decoration slots, where every vertex
  carries an implicit unit slot besides its explicit decorations.  Pairing
  an explicit class against a same-vertex slot yields a tadpole, which
  survives only for even n.  These unit/tadpole terms are forced by the
  evaluation morphism: the target differential contracts unit-decorated
  variables, so the graph side must produce matching terms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .pd_algebra import PDAlgebra, PDElement
from .scalars import ONE, ZERO, Coefficient, is_zero

Edge = Tuple[int, int]
Decoration = Tuple[int, int]  # (vertex, basis index)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphContext:
    """Ambient data every graph operation needs: the dimension n and H*(M)."""

    n: int
    algebra: PDAlgebra

    def __post_init__(self):
        if self.algebra.dimension != self.n:
            raise GraphError(
                f"algebra of formal dimension {self.algebra.dimension} used with n={self.n}")

    def dec_degree(self, class_idx: int) -> int:
        return self.algebra.degrees[class_idx]

    def dec_parity(self, class_idx: int) -> int:
        return self.algebra.degrees[class_idx] % 2


@dataclass(frozen=True)
class Graph:
    """One decorated graph with orientation given by its stored list orders."""

    r: int
    s: int
    edges: Tuple[Edge, ...]
    decorations: Tuple[Decoration, ...]

    def vertices(self) -> range:
        return range(1, self.r + self.s + 1)

    def is_external(self, v: int) -> bool:
        return 1 <= v <= self.r

    def validate(self, ctx: GraphContext, allow_loops: bool = True):
        for u, v in self.edges:
            if not (1 <= u <= self.r + self.s and 1 <= v <= self.r + self.s):
                raise GraphError(f"edge ({u},{v}) out of range")
            if u == v and not allow_loops:
                raise GraphError(f"self-loop at vertex {u} not allowed")
        for v, c in self.decorations:
            if not 1 <= v <= self.r + self.s:
                raise GraphError(f"decoration on missing vertex {v}")
            if not 0 <= c < len(ctx.algebra.names):
                raise GraphError(f"decoration class index {c} out of range")

    def degree(self, ctx: GraphContext) -> int:
        n = ctx.n
        dec = sum(ctx.dec_degree(c) for _, c in self.decorations)
        return n * self.s - (n - 1) * len(self.edges) - dec

    def parity(self, ctx: GraphContext) -> int:
        return self.degree(ctx) % 2

    def __repr__(self):
        es = ",".join(f"{u}-{v}" for u, v in self.edges)
        ds = ",".join(f"{v}:{c}" for v, c in self.decorations)
        return f"G(r={self.r},s={self.s};[{es}];[{ds}])"


def empty_graph(r: int) -> Graph:
    return Graph(r, 0, (), ())


def single_vertex(class_idx: Optional[int] = None) -> Graph:
    decs = ((1, class_idx),) if class_idx is not None else ()
    return Graph(1, 0, (), decs)


def edge_graph() -> Graph:
    """Two external vertices joined by one edge (the bracket generator)."""
    return Graph(2, 0, ((1, 2),), ())


def split_piece() -> Graph:
    """One external joined to one internal vertex (the splitting generator)."""
    return Graph(1, 1, ((1, 2),), ())


def _sort_count_odd(items: List, parity_of, key_of) -> Tuple[List, int, bool]:
    """Stable insertion sort; returns (sorted, sign, zero) with Koszul signs.

    Swapping two odd items flips the sign; two equal odd items kill the term.
    """
    out: List = []
    sign = 1
    for item in items:
        pos = len(out)
        while pos > 0 and key_of(out[pos - 1]) > key_of(item):
            if parity_of(out[pos - 1]) and parity_of(item):
                sign = -sign
            pos -= 1
        out.insert(pos, item)
    for a, b in zip(out, out[1:]):
        if a == b and parity_of(a):
            return out, 0, True
    return out, sign, False


def canonicalize(g: Graph, ctx: GraphContext) -> Optional[Tuple[Graph, int]]:
    """Deterministic normal form with sign, or None when the graph is zero."""
    g.validate(ctx)
    n = ctx.n
    n_odd = n % 2 == 1
    unit = ctx.algebra.unit_index
    decs = tuple((v, c) for v, c in g.decorations if c != unit)
    if n_odd and any(u == v for u, v in g.edges):
        return None
    best: Optional[Tuple] = None
    best_sign = 0
    seen: Dict[Tuple, int] = {}
    internals = list(range(g.r + 1, g.r + g.s + 1))
    for perm in itertools.permutations(range(g.s)):
        relabel = {internals[i]: g.r + 1 + perm[i] for i in range(g.s)}
        relabel.update({v: v for v in range(1, g.r + 1)})
        sign = 1
        if n_odd:
            sign *= _perm_sign(perm)
        edges = []
        for u, v in g.edges:
            u2, v2 = relabel[u], relabel[v]
            if u2 > v2:
                u2, v2 = v2, u2
                if n_odd:
                    sign = -sign
            edges.append((u2, v2))
        if n_odd:
            edges.sort()
        else:
            edges, esign, zero = _sort_count_odd(edges, lambda e: 1, lambda e: e)
            if zero:
                continue
            sign *= esign
        new_decs = [(relabel[v], c) for v, c in decs]
        new_decs, dsign, zero = _sort_count_odd(
            new_decs, lambda d: ctx.dec_parity(d[1]), lambda d: d)
        if zero:
            continue
        sign *= dsign
        key = (g.r, g.s, tuple(edges), tuple(new_decs))
        if key in seen and seen[key] != sign:
            return None
        seen[key] = sign
        if best is None or key < best:
            best, best_sign = key, sign
    if best is None:
        return None
    return Graph(best[0], best[1], best[2], best[3]), best_sign


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class GraphSum:
    """Formal linear combination of canonical graphs."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: GraphContext, terms: Dict[Graph, Coefficient] | None = None):
        self.ctx = ctx
        self.terms: Dict[Graph, Coefficient] = dict(terms) if terms else {}

    @classmethod
    def from_graph(cls, ctx: GraphContext, g: Graph, coeff: Coefficient = ONE) -> "GraphSum":
        out = cls(ctx)
        out.add_graph(g, coeff)
        return out

    def add_graph(self, g: Graph, coeff: Coefficient):
        if is_zero(coeff):
            return
        result = canonicalize(g, self.ctx)
        if result is None:
            return
        canon, sign = result
        acc = self.terms.get(canon, ZERO) + sign * coeff
        if is_zero(acc):
            self.terms.pop(canon, None)
        else:
            self.terms[canon] = acc

    def __add__(self, other: "GraphSum") -> "GraphSum":
        out = GraphSum(self.ctx, self.terms)
        for g, c in other.terms.items():
            acc = out.terms.get(g, ZERO) + c
            if is_zero(acc):
                out.terms.pop(g, None)
            else:
                out.terms[g] = acc
        return out

    def __sub__(self, other: "GraphSum") -> "GraphSum":
        return self + other.scale(-ONE)

    def scale(self, c) -> "GraphSum":
        if is_zero(c):
            return GraphSum(self.ctx)
        return GraphSum(self.ctx, {g: c * co for g, co in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, GraphSum) and self.ctx == other.ctx and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def homogeneous_parts(self) -> Dict[int, "GraphSum"]:
        parts: Dict[int, GraphSum] = {}
        for g, c in self.terms.items():
            d = g.degree(self.ctx)
            parts.setdefault(d, GraphSum(self.ctx)).terms[g] = c
        return parts

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{g!r}" for g, c in sorted(
            self.terms.items(), key=lambda t: repr(t[0])))


# -- structural operations ------------------------------------------------------


def graph_product_raw(a: Graph, b: Graph) -> Graph:
    """Disjoint union; orientation = concatenated orders, b's labels shifted."""
    r, s = a.r + b.r, a.s + b.s

    def re_a(v: int) -> int:
        return v if v <= a.r else v + b.r

    def re_b(v: int) -> int:
        return v + a.r if v <= b.r else v + a.r + a.s

    edges = tuple((re_a(u), re_a(v)) for u, v in a.edges) + \
        tuple((re_b(u), re_b(v)) for u, v in b.edges)
    decs = tuple((re_a(v), c) for v, c in a.decorations) + \
        tuple((re_b(v), c) for v, c in b.decorations)
    return Graph(r, s, edges, decs)


def graph_product(a: GraphSum, b: GraphSum) -> GraphSum:
    out = GraphSum(a.ctx)
    for ga, ca in a.terms.items():
        for gb, cb in b.terms.items():
            out.add_graph(graph_product_raw(ga, gb), ca * cb)
    return out


def insert(outer: Graph, i: int, inner: Graph, ctx: GraphContext) -> GraphSum:
    """Operadic insertion of ``inner`` into external vertex ``i`` of ``outer``.

    Sums over all reassignments of the edge-endpoints and decorations at
    vertex i to the vertices of ``inner``.
    """
    if not outer.is_external(i):
        raise GraphError(f"vertex {i} is not an external vertex of the outer graph")
    r = outer.r + inner.r - 1
    out = GraphSum(ctx)

    # internals: outer's internals keep their relative order first, then inner's
    def re_outer_final(v: int) -> int:
        if v < i:
            return v
        return v + inner.r - 1  # shifts both later externals and internals

    def re_inner(v: int) -> int:
        if v <= inner.r:
            return v + i - 1
        return v + r - inner.r + outer.s  # inner internal after outer internals

    # collect items at vertex i
    items: List[Tuple[str, int, int]] = []
    for e_idx, (u, v) in enumerate(outer.edges):
        if u == i:
            items.append(("e", e_idx, 0))
        if v == i:
            items.append(("e", e_idx, 1))
    for d_idx, (v, _) in enumerate(outer.decorations):
        if v == i:
            items.append(("d", d_idx, 0))
    targets = [re_inner(v) for v in inner.vertices()]
    for assignment in itertools.product(targets, repeat=len(items)):
        edges = [[re_outer_final(u) if u != i else None,
                  re_outer_final(v) if v != i else None] for u, v in outer.edges]
        decs = [[re_outer_final(v) if v != i else None, c] for v, c in outer.decorations]
        for (kind, idx, pos), target in zip(items, assignment):
            if kind == "e":
                edges[idx][pos] = target
            else:
                decs[idx][0] = target
        new_edges = tuple((u, v) for u, v in edges) + \
            tuple((re_inner(u), re_inner(v)) for u, v in inner.edges)
        new_decs = tuple((v, c) for v, c in decs) + \
            tuple((re_inner(v), c) for v, c in inner.decorations)
        out.add_graph(Graph(r, outer.s + inner.s, new_edges, new_decs), ONE)
    return out


def relabel_externals(g: Graph, perm: Dict[int, int], ctx: GraphContext) -> GraphSum:
    """Apply an external relabeling (a bijection on 1..r)."""
    edges = tuple(
        (perm.get(u, u), perm.get(v, v)) for u, v in g.edges)
    decs = tuple((perm.get(v, v), c) for v, c in g.decorations)
    return GraphSum.from_graph(ctx, Graph(g.r, g.s, edges, decs))


# -- differentials ----------------------------------------------------------------


def _vertex_items(g: Graph, v: int) -> List[Tuple[str, int, int]]:
    items: List[Tuple[str, int, int]] = []
    for e_idx, (a, b) in enumerate(g.edges):
        if a == v:
            items.append(("e", e_idx, 0))
        if b == v:
            items.append(("e", e_idx, 1))
    for d_idx, (a, _) in enumerate(g.decorations):
        if a == v:
            items.append(("d", d_idx, 0))
    return items


def delta_split(x: GraphSum) -> GraphSum:
    """Vertex splitting: (-1)^{|G|} sum over vertices and reconnections."""
    ctx = x.ctx
    out = GraphSum(ctx)
    for g, coeff in x.terms.items():
        pref = -ONE if g.parity(ctx) else ONE
        w = g.r + g.s + 1  # the new internal vertex, appended
        for v in g.vertices():
            items = _vertex_items(g, v)
            internal = not g.is_external(v)
            for mask in range(2 ** len(items)):
                # Splitting an internal vertex yields two indistinguishable
                # internal vertices, so reassignments come in mirror pairs;
                # fixing the first item on the new vertex picks each
                # configuration exactly once (and drops the bare-new-vertex
                # term, whose mirror is the full reassignment).
                if internal and not mask & 1:
                    continue
                chosen = [items[k] for k in range(len(items)) if mask >> k & 1]
                edges = [list(e) for e in g.edges]
                decs = [list(d) for d in g.decorations]
                for kind, idx, pos in chosen:
                    if kind == "e":
                        edges[idx][pos] = w
                    else:
                        decs[idx][0] = w
                new_edges = tuple(tuple(e) for e in edges) + ((v, w),)
                new_decs = tuple(tuple(d) for d in decs)
                out.add_graph(Graph(g.r, g.s + 1, new_edges, new_decs),
                              pref * coeff)
    return out


def _pair_slots(g: Graph, ctx: GraphContext, i: int, j_explicit: Optional[int],
                unit_vertex: Optional[int]) -> Optional[Tuple[Graph, Fraction]]:
    """Contract decoration slot i with slot j (explicit) or a unit slot.

    Returns the raw result graph and the pairing coefficient including the
    Koszul extraction signs, or None when the pairing vanishes.
    """
    A = ctx.algebra
    vi, ci = g.decorations[i]
    alpha = A.basis_element(ci)
    if j_explicit is not None:
        vj, cj = g.decorations[j_explicit]
        beta = A.basis_element(cj)
    else:
        vj, beta = unit_vertex, A.unit
    value = A.pairing(alpha, beta)
    if value == 0:
        return None
    sign = 1
    pa = ctx.dec_parity(ci)
    before_i = sum(ctx.dec_parity(c) for _, c in g.decorations[:i])
    if pa and before_i % 2:
        sign = -sign
    if j_explicit is not None:
        pb = ctx.dec_parity(g.decorations[j_explicit][1])
        before_j = sum(ctx.dec_parity(c) for _, c in g.decorations[:j_explicit]) - pa
        if pb and before_j % 2:
            sign = -sign
        removed = {i, j_explicit}
    else:
        removed = {i}
    new_decs = tuple(d for k, d in enumerate(g.decorations) if k not in removed)
    new_edges = g.edges + ((vi, vj),)
    return Graph(g.r, g.s, new_edges, new_decs), sign * value


def delta_pair(x: GraphSum) -> GraphSum:
    """Pair complementary decoration slots into a new edge.

    Besides explicit-explicit pairs this includes each explicit decoration
    against the implicit unit slot of every vertex (same vertex included,
    producing a tadpole that survives only for even n).
    """
    ctx = x.ctx
    out = GraphSum(ctx)
    for g, coeff in x.terms.items():
        for i in range(len(g.decorations)):
            for j in range(i + 1, len(g.decorations)):
                res = _pair_slots(g, ctx, i, j, None)
                if res is not None:
                    out.add_graph(res[0], res[1] * coeff)
            for v in g.vertices():
                res = _pair_slots(g, ctx, i, None, v)
                if res is not None:
                    out.add_graph(res[0], res[1] * coeff)
    return out


def delta(x: GraphSum) -> GraphSum:
    return delta_split(x) + delta_pair(x)


def bracket_defect(a: GraphSum, b: GraphSum) -> GraphSum:
    """{a,b}_G = d_pair(a.b) - d_pair(a).b - (-1)^{|a|} a.d_pair(b)."""
    ctx = a.ctx
    out = GraphSum(ctx)
    for da, apart in a.homogeneous_parts().items():
        sign = -ONE if da % 2 else ONE
        out = out + (delta_pair(graph_product(apart, b))
                     - graph_product(delta_pair(apart), b)
                     - graph_product(apart, delta_pair(b)).scale(sign))
    return out


def bracket_cross(a: GraphSum, b: GraphSum) -> GraphSum:
    """Direct cross-pairing form of the bracket (oracle for bracket_defect)."""
    ctx = a.ctx
    out = GraphSum(ctx)
    for ga, ca in a.terms.items():
        for gb, cb in b.terms.items():
            prod = graph_product_raw(ga, gb)
            na = len(ga.decorations)
            coeff = ca * cb

            def vertex_in_b(v: int) -> bool:
                return (ga.r < v <= ga.r + gb.r) or v > ga.r + gb.r + ga.s

            for i in range(len(prod.decorations)):
                from_a_i = (i < na)
                for j in range(i + 1, len(prod.decorations)):
                    if from_a_i == (j < na):
                        continue
                    res = _pair_slots(prod, ctx, i, j, None)
                    if res is not None:
                        out.add_graph(res[0], res[1] * coeff)
                # explicit slot from one factor against unit slots of the other
                for v in prod.vertices():
                    if vertex_in_b(v) == from_a_i:
                        res = _pair_slots(prod, ctx, i, None, v)
                        if res is not None:
                            out.add_graph(res[0], res[1] * coeff)
    return out


def check_mc_graph(z: GraphSum, max_internal: int = 6, max_edges: int = 8) -> bool:
    """Maurer-Cartan test: delta(z) + (1/2){z,z}_G = 0 within the sector bound."""
    for g in z.terms:
        if g.r != 0:
            raise GraphError("partition function must be supported on arity-0 graphs")
    expr = delta(z) + bracket_defect(z, z).scale(Fraction(1, 2))
    for g, c in expr.terms.items():
        if g.s <= max_internal and len(g.edges) <= max_edges and not is_zero(c):
            return False
    return True


def twisted_differential(z: GraphSum, validate: bool = True,
                         max_internal: int = 6, max_edges: int = 8):
    """delta^z = {z, .}_G for a Maurer-Cartan partition function z."""
    if validate and not check_mc_graph(z, max_internal, max_edges):
        raise GraphError("partition function fails the Maurer-Cartan equation")

    def d(x: GraphSum) -> GraphSum:
        return bracket_defect(z, x)

    return d


# -- JSON ----------------------------------------------------------------------


def _vertex_from_name(name: str, r: int) -> int:
    if name.startswith("i"):
        return r + int(name[1:])
    return int(name)


def graph_from_json(data: dict, ctx: GraphContext) -> Graph:
    r, s = int(data["arity"]), int(data.get("internal", 0))
    edges = tuple((_vertex_from_name(str(u), r), _vertex_from_name(str(v), r))
                  for u, v in data.get("edges", []))
    decs = []
    for v, cname in data.get("decorations", []):
        if cname not in ctx.algebra.index_of:
            raise GraphError(f"unknown decoration class {cname!r}")
        decs.append((_vertex_from_name(str(v), r), ctx.algebra.index_of[cname]))
    g = Graph(r, s, edges, tuple(decs))
    g.validate(ctx, allow_loops=False)
    return g


def graph_to_json(g: Graph, ctx: GraphContext) -> dict:
    def name(v: int) -> str:
        return str(v) if v <= g.r else f"i{v - g.r}"

    return {
        "arity": g.r,
        "internal": g.s,
        "edges": [[name(u), name(v)] for u, v in g.edges],
        "decorations": [[name(v), ctx.algebra.names[c]] for v, c in g.decorations],
    }
