"""Edge-weighted decision diagrams for state vectors and unitary operators.

Nodes are hash-consed per package; weights are complex numbers unified
through a tolerance-based value table so that numerically equal weights
share one float representation. Every node is normalized so that its
largest-magnitude child weight (lowest index on ties) is exactly 1; the
factor is pushed onto the incoming edge.

The diagrams are quasi-reduced: a node for qubit ``q`` always points to
nodes for qubit ``q - 1`` (or the terminal when ``q == 0``), except for the
canonical zero edge, which may appear at any level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, NamedTuple, Sequence

import numpy as np

if TYPE_CHECKING:
    from .circuit import Gate

EPS_C = 1e-10
EPS_N = 1e-9
SQRT1_2 = 1 / math.sqrt(2)
COMPUTE_TABLE_BITS = 16
GC_THRESHOLD = 65536


class DDError(Exception):
    """Base class for decision-diagram errors."""


class DDStructureError(DDError):
    """A node would violate the fixed variable order or arity."""


class DimensionMismatch(DDError, ValueError):
    pass


class Node:
    __slots__ = ("var", "edges", "id", "ref", "ident")

    def __init__(self, var: int, edges: tuple, uid: int) -> None:
        self.var = var
        self.edges = edges
        self.id = uid
        self.ref = 0
        self.ident = False

    @property
    def is_terminal(self) -> bool:
        return self.var < 0

    def __repr__(self) -> str:
        if self.var < 0:
            return "Node(terminal)"
        return f"Node(id={self.id}, var={self.var}, weights={[e.w for e in self.edges]})"


class Edge(NamedTuple):
    w: complex
    node: Node

    @property
    def is_zero(self) -> bool:
        return self.w == 0


TERMINAL = Node(-1, (), 0)
TERMINAL.ident = True
ZERO = Edge(0j, TERMINAL)
ONE = Edge(1 + 0j, TERMINAL)


class ValueTable:
    """Tolerance-based unification of real numbers.

    Values are bucketed on a grid of width ``tol``; a lookup returns an already
    stored value within ``tol`` if one exists, otherwise stores the query.
    """

    def __init__(self, tol: float = EPS_C) -> None:
        self.tol = tol
        self._buckets: dict[int, float] = {}
        for v in (1.0, SQRT1_2, 0.5):
            self.lookup(v)
            self.lookup(-v)

    def __len__(self) -> int:
        return len(self._buckets)

    def lookup(self, x: float) -> float:
        tol = self.tol
        if -tol <= x <= tol:
            return 0.0
        k = math.floor(x / tol)
        buckets = self._buckets
        v = buckets.get(k)
        if v is not None:
            return v
        v = buckets.get(k - 1)
        if v is not None and x - v <= tol:
            return v
        v = buckets.get(k + 1)
        if v is not None and v - x <= tol:
            return v
        buckets[k] = x
        return x

    def complex(self, z: complex) -> complex:
        return complex(self.lookup(z.real), self.lookup(z.imag))


class ComputeTable:
    """Direct-mapped memo table that overwrites on collision."""

    def __init__(self, bits: int = COMPUTE_TABLE_BITS) -> None:
        self.mask = (1 << bits) - 1
        self._slots: list = [None] * (1 << bits)
        self.lookups = 0
        self.hits = 0

    def get(self, key):
        self.lookups += 1
        entry = self._slots[hash(key) & self.mask]
        if entry is not None and entry[0] == key:
            self.hits += 1
            return entry[1]
        return None

    def put(self, key, value) -> None:
        self._slots[hash(key) & self.mask] = (key, value)

    def clear(self) -> None:
        self._slots = [None] * (self.mask + 1)

    @property
    def hit_rate(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0


@dataclass(frozen=True)
class VectorDD:
    """A state vector over ``num_qubits`` qubits."""

    root: Edge
    num_qubits: int
    package: DDPackage = field(compare=False, repr=False)

    def amplitude(self, bits: str) -> complex:
        return self.package.get_amplitude(self, bits)

    def to_numpy(self) -> np.ndarray:
        return self.package.to_vector(self)

    def node_count(self) -> int:
        return node_count(self)


@dataclass(frozen=True)
class MatrixDD:
    """A ``2**n x 2**n`` operator over ``num_qubits`` qubits."""

    root: Edge
    num_qubits: int
    package: DDPackage = field(compare=False, repr=False)

    def element(self, row: int, col: int) -> complex:
        return self.package.get_element(self, row, col)

    def to_numpy(self) -> np.ndarray:
        return self.package.to_matrix(self)

    def node_count(self) -> int:
        return node_count(self)


def _nodes(root: Edge) -> Iterator[Node]:
    seen: set[int] = set()
    stack = [root.node]
    while stack:
        node = stack.pop()
        if node.var < 0 or id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(e.node for e in node.edges)


def node_count(dd: VectorDD | MatrixDD | Edge) -> int:
    """Number of distinct non-terminal nodes reachable from the root."""
    root = dd if isinstance(dd, Edge) else dd.root
    return sum(1 for _ in _nodes(root))


class DDPackage:
    """Owner of all nodes, value and compute tables.

    A package is single-threaded; nodes must never be mixed between packages.
    """

    def __init__(
        self,
        tol: float = EPS_C,
        compute_table_bits: int = COMPUTE_TABLE_BITS,
        gc_threshold: int = GC_THRESHOLD,
    ) -> None:
        self.tol = tol
        self.values = ValueTable(tol)
        self.gc_threshold = gc_threshold
        self._unique: tuple[dict, dict] = ({}, {})  # vector, matrix
        self._next_id = 1
        self._live = 0
        self.peak_nodes = 0
        self.gc_runs = 0
        kinds = ("add", "mv", "mm", "ct", "ip", "kron")
        self.compute_tables = {k: ComputeTable(compute_table_bits) for k in kinds}
        self._identities: list[Edge] = [ONE]
        self._gate_cache: dict = {}

    # -- bookkeeping ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        """Nodes currently stored in the unique tables."""
        return len(self._unique[0]) + len(self._unique[1])

    @property
    def live_nodes(self) -> int:
        return self._live

    def statistics(self) -> dict:
        return {
            "nodes": self.node_count,
            "live_nodes": self._live,
            "peak_nodes": self.peak_nodes,
            "gc_runs": self.gc_runs,
            "values": len(self.values),
            "compute_tables": {
                k: {"lookups": t.lookups, "hits": t.hits, "hit_rate": t.hit_rate}
                for k, t in self.compute_tables.items()
            },
        }

    def clear_compute_tables(self) -> None:
        for t in self.compute_tables.values():
            t.clear()

    def incref(self, dd: VectorDD | MatrixDD | Edge) -> None:
        """Register ``dd`` as a root that survives garbage collection."""
        stack = [(dd if isinstance(dd, Edge) else dd.root).node]
        while stack:
            node = stack.pop()
            if node.var < 0:
                continue
            node.ref += 1
            if node.ref == 1:
                self._live += 1
                stack.extend(e.node for e in node.edges)

    def decref(self, dd: VectorDD | MatrixDD | Edge) -> None:
        stack = [(dd if isinstance(dd, Edge) else dd.root).node]
        while stack:
            node = stack.pop()
            if node.var < 0:
                continue
            if node.ref <= 0:
                raise DDError(f"reference count underflow on {node!r}")
            node.ref -= 1
            if node.ref == 0:
                self._live -= 1
                stack.extend(e.node for e in node.edges)

    @property
    def dead_nodes(self) -> int:
        return self.node_count - self._live

    def garbage_collect(self, force: bool = False) -> int:
        """Drop unreferenced nodes once ``gc_threshold`` dead nodes accumulate.

        Returns the number of nodes removed. Compute tables and the gate cache
        are cleared because they may point at removed nodes.
        """
        if not force and self.dead_nodes < self.gc_threshold:
            return 0
        removed = 0
        for table in self._unique:
            dead = [k for k, n in table.items() if n.ref == 0]
            for k in dead:
                del table[k]
            removed += len(dead)
        self.clear_compute_tables()
        self._gate_cache.clear()
        self.gc_runs += 1
        return removed

    # -- node construction ---------------------------------------------------

    def _check_children(self, var: int, edges: Sequence[Edge]) -> None:
        if var < 0:
            raise DDStructureError("variable index must be non-negative")
        for e in edges:
            if e.w == 0:
                continue
            child = e.node.var
            if child != var - 1:
                raise DDStructureError(
                    f"child at var {child} under var {var}; expected var {var - 1}"
                )

    def _make_node(self, var: int, edges: Sequence[Edge], table: dict) -> Edge:
        tol = self.tol
        mags = [abs(e.w) for e in edges]
        top = max(mags)
        if top <= tol:
            return ZERO
        pivot = 0
        while mags[pivot] < top - tol:
            pivot += 1
        wp = edges[pivot].w
        lookup = self.values.complex
        normed = []
        for i, e in enumerate(edges):
            if i == pivot:
                normed.append(Edge(1 + 0j, e.node))
            elif mags[i] <= tol:
                normed.append(ZERO)
            else:
                w = lookup(e.w / wp)
                normed.append(ZERO if w == 0 else Edge(w, e.node))
        key = (var, *normed)
        node = table.get(key)
        if node is None:
            node = Node(var, tuple(normed), self._next_id)
            self._next_id += 1
            if len(normed) == 4:
                c = normed[0]
                node.ident = (
                    c.w == 1 and c.node.ident and normed[1].w == 0
                    and normed[2].w == 0 and normed[3] == c
                )
            table[key] = node
            total = self.node_count
            if total > self.peak_nodes:
                self.peak_nodes = total
        return Edge(lookup(wp), node)

    def make_vector_node(self, var: int, children: Sequence[Edge]) -> Edge:
        if len(children) != 2:
            raise DDStructureError("vector nodes have exactly two children")
        self._check_children(var, children)
        return self._make_node(var, children, self._unique[0])

    def make_matrix_node(self, var: int, children: Sequence[Edge]) -> Edge:
        if len(children) != 4:
            raise DDStructureError("matrix nodes have exactly four children")
        self._check_children(var, children)
        return self._make_node(var, children, self._unique[1])

    def _scale(self, e: Edge, w: complex) -> Edge:
        if e.w == 0 or w == 0:
            return ZERO
        if w == 1:
            return e
        v = self.values.complex(e.w * w)
        return ZERO if v == 0 else Edge(v, e.node)

    # -- basic diagrams ------------------------------------------------------

    def identity_edge(self, n: int) -> Edge:
        while len(self._identities) <= n:
            k = len(self._identities) - 1
            below = self._identities[k]
            e = self.make_matrix_node(k, (below, ZERO, ZERO, below))
            self.incref(e)  # identities are kept for the package lifetime
            self._identities.append(e)
        return self._identities[n]

    def identity(self, n: int) -> MatrixDD:
        return MatrixDD(self.identity_edge(n), n, self)

    def basis_state(self, n: int, bits: str | int = 0) -> VectorDD:
        """Computational basis state; ``bits`` is a string with qubit n-1 leftmost or an int."""
        index = _index_of(bits, n)
        e = ONE
        for q in range(n):
            bit = (index >> q) & 1
            e = self.make_vector_node(q, (ZERO, e) if bit else (e, ZERO))
        return VectorDD(e, n, self)

    def zero_state(self, n: int) -> VectorDD:
        return self.basis_state(n, 0)

    def product_state(self, singles: Sequence[Sequence[complex]]) -> VectorDD:
        """Tensor product of one 2-vector per qubit, ``singles[q]`` for qubit q."""
        e = ONE
        for q, (a, b) in enumerate(singles):
            e = self.make_vector_node(q, (self._scale(e, complex(a)), self._scale(e, complex(b))))
        return VectorDD(e, len(singles), self)

    def from_vector(self, vec: Sequence[complex]) -> VectorDD:
        arr = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(arr.size))) if arr.size else -1
        if n < 0 or 1 << n != arr.size:
            raise DimensionMismatch("vector length must be a power of two")

        def build(lo: int, q: int) -> Edge:
            if q < 0:
                v = self.values.complex(complex(arr[lo]))
                return ZERO if v == 0 else Edge(v, TERMINAL)
            half = 1 << q
            return self.make_vector_node(q, (build(lo, q - 1), build(lo + half, q - 1)))

        return VectorDD(build(0, n - 1), n, self)

    def from_matrix(self, mat: np.ndarray) -> MatrixDD:
        arr = np.asarray(mat, dtype=complex)
        n = int(round(math.log2(arr.shape[0]))) if arr.size else -1
        if n < 0 or arr.shape != (1 << n, 1 << n):
            raise DimensionMismatch("matrix must be square with power-of-two size")

        def build(r: int, c: int, q: int) -> Edge:
            if q < 0:
                v = self.values.complex(complex(arr[r, c]))
                return ZERO if v == 0 else Edge(v, TERMINAL)
            h = 1 << q
            kids = [build(r + i * h, c + j * h, q - 1) for i in (0, 1) for j in (0, 1)]
            return self.make_matrix_node(q, kids)

        return MatrixDD(build(0, 0, n - 1), n, self)

    def operator(self, matrix: np.ndarray, qubits: Sequence[int], n: int) -> MatrixDD:
        """Lift a dense ``k``-qubit matrix acting on ``qubits`` to ``n`` qubits.

        ``qubits[0]`` is the most significant bit of the matrix index; every
        other qubit carries the identity.
        """
        k = len(qubits)
        if len(set(qubits)) != k:
            raise DDStructureError(f"duplicate operand in {list(qubits)}")
        if any(q < 0 or q >= n for q in qubits):
            raise DDStructureError(f"operand outside 0..{n - 1} in {list(qubits)}")
        mat = np.asarray(matrix, dtype=complex)
        if mat.shape != (1 << k, 1 << k):
            raise DimensionMismatch(f"{k}-qubit operator needs a {1 << k}x{1 << k} matrix")
        bitpos = {q: 1 << (k - 1 - i) for i, q in enumerate(qubits)}
        memo: dict = {}

        def build(level: int, row: int, col: int) -> Edge:
            key = (level, row, col)
            hit = memo.get(key)
            if hit is not None:
                return hit
            if level < 0:
                v = self.values.complex(complex(mat[row, col]))
                out = ZERO if v == 0 else Edge(v, TERMINAL)
            elif level in bitpos:
                b = bitpos[level]
                kids = [build(level - 1, row | (i * b), col | (j * b)) for i in (0, 1) for j in (0, 1)]
                out = self.make_matrix_node(level, kids)
            else:
                below = build(level - 1, row, col)
                out = self.make_matrix_node(level, (below, ZERO, ZERO, below))
            memo[key] = out
            return out

        return MatrixDD(build(n - 1, 0, 0), n, self)

    def gate_to_matrix_dd(self, gate: Gate, n: int) -> MatrixDD:
        if not gate.is_unitary:
            raise DDError(f"{gate.kind} has no matrix")
        key = (gate.kind, gate.qubits, gate.angle, n)
        hit = self._gate_cache.get(key)
        if hit is None:
            hit = self.operator(gate.matrix(), gate.qubits, n)
            self._gate_cache[key] = hit
        return hit

    # -- arithmetic ----------------------------------------------------------

    def _add(self, x: Edge, y: Edge) -> Edge:
        if x.w == 0:
            return y
        if y.w == 0:
            return x
        xn, yn = x.node, y.node
        if xn is yn:
            w = self.values.complex(x.w + y.w)
            return ZERO if w == 0 else Edge(w, xn)
        if xn.id > yn.id:
            x, y, xn, yn = y, x, yn, xn
        ratio = self.values.complex(y.w / x.w)
        table = self.compute_tables["add"]
        key = (xn, yn, ratio)
        res = table.get(key)
        if res is None:
            kids = [
                self._add(ex, self._scale(ey, ratio))
                for ex, ey in zip(xn.edges, yn.edges)
            ]
            if len(kids) == 2:
                res = self.make_vector_node(xn.var, kids)
            else:
                res = self.make_matrix_node(xn.var, kids)
            table.put(key, res)
        return self._scale(res, x.w)

    def _mv(self, m: Edge, v: Edge) -> Edge:
        if m.w == 0 or v.w == 0:
            return ZERO
        w = m.w * v.w
        mn, vn = m.node, v.node
        if mn.ident:
            return self._scale(Edge(1 + 0j, vn), w)
        table = self.compute_tables["mv"]
        key = (mn, vn)
        res = table.get(key)
        if res is None:
            me, ve = mn.edges, vn.edges
            c0 = self._add(self._mv(me[0], ve[0]), self._mv(me[1], ve[1]))
            c1 = self._add(self._mv(me[2], ve[0]), self._mv(me[3], ve[1]))
            res = self.make_vector_node(mn.var, (c0, c1))
            table.put(key, res)
        return self._scale(res, w)

    def _mm(self, a: Edge, b: Edge) -> Edge:
        if a.w == 0 or b.w == 0:
            return ZERO
        w = a.w * b.w
        an, bn = a.node, b.node
        if an.ident:
            return self._scale(Edge(1 + 0j, bn), w)
        if bn.ident:
            return self._scale(Edge(1 + 0j, an), w)
        table = self.compute_tables["mm"]
        key = (an, bn)
        res = table.get(key)
        if res is None:
            ae, be = an.edges, bn.edges
            kids = [
                self._add(self._mm(ae[2 * i], be[k]), self._mm(ae[2 * i + 1], be[2 + k]))
                for i in (0, 1)
                for k in (0, 1)
            ]
            res = self.make_matrix_node(an.var, kids)
            table.put(key, res)
        return self._scale(res, w)

    def _ct(self, m: Edge) -> Edge:
        if m.w == 0:
            return ZERO
        node = m.node
        w = m.w.conjugate()
        if node.ident:
            return self._scale(Edge(1 + 0j, node), w)
        table = self.compute_tables["ct"]
        res = table.get(node)
        if res is None:
            e = node.edges
            res = self.make_matrix_node(node.var, [self._ct(e[0]), self._ct(e[2]), self._ct(e[1]), self._ct(e[3])])
            table.put(node, res)
        return self._scale(res, w)

    def _ip(self, x: Edge, y: Edge) -> complex:
        if x.w == 0 or y.w == 0:
            return 0j
        w = x.w.conjugate() * y.w
        xn, yn = x.node, y.node
        if xn.var < 0:
            return w
        table = self.compute_tables["ip"]
        key = (xn, yn)
        res = table.get(key)
        if res is None:
            res = sum((self._ip(a, b) for a, b in zip(xn.edges, yn.edges)), 0j)
            table.put(key, res)
        return w * res

    @staticmethod
    def _same_width(a, b) -> None:
        if a.num_qubits != b.num_qubits:
            raise DimensionMismatch(f"operands on {a.num_qubits} and {b.num_qubits} qubits")

    def add(self, a: VectorDD | MatrixDD, b: VectorDD | MatrixDD):
        self._same_width(a, b)
        if type(a) is not type(b):
            raise DimensionMismatch("cannot add a vector and a matrix")
        return type(a)(self._add(a.root, b.root), a.num_qubits, self)

    def scale(self, a: VectorDD | MatrixDD, w: complex):
        return type(a)(self._scale(a.root, self.values.complex(complex(w))), a.num_qubits, self)

    def multiply(self, m: MatrixDD, v: VectorDD) -> VectorDD:
        self._same_width(m, v)
        return VectorDD(self._mv(m.root, v.root), v.num_qubits, self)

    def multiply_mm(self, a: MatrixDD, b: MatrixDD) -> MatrixDD:
        self._same_width(a, b)
        return MatrixDD(self._mm(a.root, b.root), a.num_qubits, self)

    def conjugate_transpose(self, m: MatrixDD) -> MatrixDD:
        return MatrixDD(self._ct(m.root), m.num_qubits, self)

    def inner_product(self, a: VectorDD, b: VectorDD) -> complex:
        """``<a|b>``."""
        self._same_width(a, b)
        return self._ip(a.root, b.root)

    def norm_squared(self, a: VectorDD) -> float:
        return self.inner_product(a, a).real

    def fidelity(self, a: VectorDD, b: VectorDD) -> float:
        """``|<a|b>|^2`` for normalized inputs; inputs are rescaled to unit norm."""
        na, nb = self.norm_squared(a), self.norm_squared(b)
        if na == 0 or nb == 0:
            return 0.0
        f = abs(self.inner_product(a, b)) ** 2 / (na * nb)
        return min(1.0, max(0.0, f))

    # -- element access ------------------------------------------------------

    def get_amplitude(self, v: VectorDD, bits: str | int) -> complex:
        index = _index_of(bits, v.num_qubits)
        e = v.root
        w = e.w
        for q in range(v.num_qubits - 1, -1, -1):
            if w == 0:
                return 0j
            e = e.node.edges[(index >> q) & 1]
            w *= e.w
        return w

    def get_element(self, m: MatrixDD, row: int, col: int) -> complex:
        e = m.root
        w = e.w
        for q in range(m.num_qubits - 1, -1, -1):
            if w == 0:
                return 0j
            e = e.node.edges[2 * ((row >> q) & 1) + ((col >> q) & 1)]
            w *= e.w
        return w

    def to_vector(self, v: VectorDD) -> np.ndarray:
        memo: dict[int, np.ndarray] = {}

        def dense(node: Node, q: int) -> np.ndarray:
            if q < 0:
                return np.ones(1, dtype=complex)
            hit = memo.get(id(node))
            if hit is None:
                parts = [
                    e.w * dense(e.node, q - 1) if e.w != 0 else np.zeros(1 << q, dtype=complex)
                    for e in node.edges
                ]
                hit = np.concatenate(parts)
                memo[id(node)] = hit
            return hit

        if v.root.w == 0:
            return np.zeros(1 << v.num_qubits, dtype=complex)
        return v.root.w * dense(v.root.node, v.num_qubits - 1)

    def to_matrix(self, m: MatrixDD) -> np.ndarray:
        memo: dict[int, np.ndarray] = {}

        def dense(node: Node, q: int) -> np.ndarray:
            if q < 0:
                return np.ones((1, 1), dtype=complex)
            hit = memo.get(id(node))
            if hit is None:
                size = 1 << q
                blocks = [
                    e.w * dense(e.node, q - 1) if e.w != 0 else np.zeros((size, size), dtype=complex)
                    for e in node.edges
                ]
                hit = np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])
                memo[id(node)] = hit
            return hit

        size = 1 << m.num_qubits
        if m.root.w == 0:
            return np.zeros((size, size), dtype=complex)
        return m.root.w * dense(m.root.node, m.num_qubits - 1)

    def to_dot(self, dd: VectorDD | MatrixDD) -> str:
        """Graphviz rendering; weights printed with 6 significant digits."""

        def fmt(w: complex) -> str:
            return f"{w.real:.6g}{w.imag:+.6g}i"

        lines = ["digraph dd {", '  root [shape=point];', '  t [label="1", shape=box];']

        def name(node: Node) -> str:
            return "t" if node.var < 0 else f"n{node.id}"

        lines.append(f'  root -> {name(dd.root.node)} [label="{fmt(dd.root.w)}"];')
        for node in _nodes(dd.root):
            lines.append(f'  n{node.id} [label="q{node.var} #{node.id}"];')
            for i, e in enumerate(node.edges):
                if e.w == 0:
                    continue
                lines.append(f'  n{node.id} -> {name(e.node)} [label="{i}: {fmt(e.w)}"];')
        lines.append("}")
        return "\n".join(lines)


def _index_of(bits: str | int, n: int) -> int:
    if isinstance(bits, str):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise DimensionMismatch(f"expected a {n}-character bitstring, got {bits!r}")
        return int(bits, 2) if bits else 0
    if not 0 <= bits < (1 << n):
        raise DimensionMismatch(f"basis index {bits} out of range for {n} qubits")
    return int(bits)


def fidelity(a: VectorDD, b: VectorDD) -> float:
    return a.package.fidelity(a, b)


def identity_dd(n: int, package: DDPackage | None = None) -> MatrixDD:
    return (package or DDPackage()).identity(n)
