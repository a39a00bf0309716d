"""Assignment-tester composition and graph powering at micro scale.

A game G' is hidden inside a larger constraint graph: each G' edge becomes
a Boolean circuit accepting the encoded satisfying answer pairs, the circuit
becomes a gadget via a Tseitin-style tester, and the gadgets are glued into
one graph. Powering that graph lets each vertex speak for its whole cloud;
projecting a super-labeling back gives a G' strategy at least as good as the
fraction of gadgets the super-labeling fully satisfies.

Gadgets share the owner triples of the encoded blocks ``[v]`` across every
G' edge incident to ``v``, so the decoded strategy is one labeling of G'.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import caps
from .errors import (
    CircuitTooLarge,
    CloudTooLarge,
    CodeMismatch,
    GadgetTooLarge,
    InvalidSpec,
    NotComposedGraph,
    UndefinedVertex,
    WalkSpaceTooLarge,
)
from .game import Game, Strategy, strategy_value, value_exact
from .rng import derive_rng

SLOTS = 3
SIGMA0 = 2**SLOTS


def bit(symbol: int, slot: int) -> int:
    return (symbol >> slot) & 1


# ---------------------------------------------------------------- constraint graphs


@dataclass(frozen=True)
class ConstraintGraph:
    """General multigraph (self-loops allowed) with binary constraints.

    A self-loop ``(u, u)`` is satisfied by label ``a`` iff ``(a, a)`` is allowed.
    """

    num_vertices: int
    alphabet_size: int
    edges: tuple[tuple[int, int], ...]
    constraints: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.edges) != len(self.constraints):
            raise InvalidSpec("constraints must parallel edges")
        for u, v in self.edges:
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise InvalidSpec(f"edge ({u}, {v}) outside {self.num_vertices} vertices")

    @property
    def size(self) -> int:
        return len(self.edges)

    @cached_property
    def allowed(self) -> np.ndarray:
        q = self.alphabet_size
        t = np.zeros((len(self.edges), q, q), dtype=bool)
        for i, c in enumerate(self.constraints):
            for a, b in c:
                t[i, a, b] = True
        t.setflags(write=False)
        return t

    @cached_property
    def trivial(self) -> np.ndarray:
        """Edges whose constraint allows every pair."""
        return self.allowed.reshape(len(self.edges), -1).all(axis=1)

    @cached_property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        return e[:, 0], e[:, 1]

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Walk-step counts: ``A[u, v]`` edges usable from u to v; a loop counts once."""
        n = self.num_vertices
        A = np.zeros((n, n), dtype=np.int64)
        for u, v in self.edges:
            A[u, v] += 1
            if u != v:
                A[v, u] += 1
        return A

    @property
    def max_degree(self) -> int:
        return int(self.adjacency.sum(axis=1).max()) if self.edges else 0

    def satisfied(self, labels: Sequence[int]) -> np.ndarray:
        lab = np.asarray(labels, dtype=np.int64)
        u, v = self.endpoints
        return self.allowed[np.arange(self.size), lab[u], lab[v]]

    def unsat_fraction(self, labels: Sequence[int]) -> Fraction:
        if not self.edges:
            return Fraction(0)
        return Fraction(int((~self.satisfied(labels)).sum()), self.size)


def graph_value_local_search(g: ConstraintGraph, restarts: int = 8, seed: int = 0) -> tuple[Fraction, list[int]]:
    """Lower bound on the best satisfied fraction (first-improvement hill climbing)."""
    q, n = g.alphabet_size, g.num_vertices
    inc: list[list[int]] = [[] for _ in range(n)]
    for i, (u, v) in enumerate(g.edges):
        inc[u].append(i)
        if v != u:
            inc[v].append(i)
    u_arr, v_arr = g.endpoints
    allowed = g.allowed

    def local(lab, x):
        return sum(int(allowed[i, lab[u_arr[i]], lab[v_arr[i]]]) for i in inc[x])

    best, best_lab = -1, None
    for r in range(restarts):
        lab = [int(a) for a in derive_rng(seed, "local-search", r).integers(0, q, size=n)]
        improved = True
        while improved:
            improved = False
            for x in range(n):
                cur, keep = local(lab, x), lab[x]
                for a in range(q):
                    lab[x] = a
                    if local(lab, x) > cur:
                        improved = True
                        break
                    lab[x] = keep
                if improved:
                    break
        score = int(g.satisfied(lab).sum())
        if score > best:
            best, best_lab = score, list(lab)
    return Fraction(best, g.size), best_lab


# ---------------------------------------------------------------- circuits and codes


@dataclass(frozen=True)
class BooleanCircuit:
    """Wires ``0..n_inputs-1`` are inputs; gate ``i`` drives wire ``n_inputs + i``.

    Gates are ``("AND", a, b)``, ``("OR", a, b)`` or ``("NOT", a)`` and may only
    read earlier wires.
    """

    n_inputs: int
    gates: tuple[tuple, ...]
    output: int

    def __post_init__(self):
        gates = tuple(tuple(g) for g in self.gates)
        for i, g in enumerate(gates):
            op, args = g[0], g[1:]
            arity = {"AND": 2, "OR": 2, "NOT": 1}.get(op)
            if arity is None or len(args) != arity:
                raise InvalidSpec(f"bad gate {g}")
            for a in args:
                if not 0 <= a < self.n_inputs + i:
                    raise InvalidSpec(f"gate {i} reads undefined wire {a}")
        if not 0 <= self.output < self.n_inputs + len(gates):
            raise InvalidSpec("output wire undefined")
        object.__setattr__(self, "gates", gates)

    @property
    def n_wires(self) -> int:
        return self.n_inputs + len(self.gates)

    def wires(self, inputs: Sequence[int]) -> list[int]:
        if len(inputs) != self.n_inputs:
            raise InvalidSpec(f"expected {self.n_inputs} inputs")
        w = [int(b) & 1 for b in inputs]
        for op, *args in self.gates:
            if op == "NOT":
                w.append(1 - w[args[0]])
            elif op == "AND":
                w.append(w[args[0]] & w[args[1]])
            else:
                w.append(w[args[0]] | w[args[1]])
        return w

    def evaluate(self, inputs: Sequence[int]) -> int:
        return self.wires(inputs)[self.output]

    def truth_table(self) -> list[tuple[int, ...]]:
        """All accepted inputs, in binary counting order (input 0 most significant)."""
        out = []
        for m in range(2**self.n_inputs):
            bits = tuple((m >> (self.n_inputs - 1 - j)) & 1 for j in range(self.n_inputs))
            if self.evaluate(bits):
                out.append(bits)
        return out


@dataclass(frozen=True)
class BinaryCode:
    words: tuple[tuple[int, ...], ...]  # words[a] = e(a)
    declared_c: int = 2

    def __post_init__(self):
        words = tuple(tuple(int(b) for b in w) for w in self.words)
        object.__setattr__(self, "words", words)
        if len(set(words)) != len(words):
            raise InvalidSpec("code is not injective")
        if len({len(w) for w in words}) != 1:
            raise InvalidSpec("codewords must share one length")
        q = len(words)
        lo = math.log2(q) if q > 1 else 0
        if not lo <= self.length <= self.declared_c * max(1.0, lo):
            raise InvalidSpec(f"length {self.length} outside [log2 q, {self.declared_c} log2 q]")

    @property
    def alphabet_size(self) -> int:
        return len(self.words)

    @property
    def length(self) -> int:
        return len(self.words[0])

    @property
    def distance(self) -> Fraction:
        """Minimum pairwise relative Hamming distance."""
        if len(self.words) < 2:
            return Fraction(1)
        d = min(sum(a != b for a, b in zip(u, v)) for u, v in combinations(self.words, 2))
        return Fraction(d, self.length)

    def encode(self, a: int) -> tuple[int, ...]:
        return self.words[a]

    def decode(self, bits: Sequence[int]) -> int:
        """Nearest codeword; ties go to the smallest symbol."""
        bits = tuple(bits)
        dists = [sum(x != y for x, y in zip(w, bits)) for w in self.words]
        return int(np.argmin(dists))


def repetition_code(alphabet_size: int, reps: int = 2) -> BinaryCode:
    """Binary expansion of the symbol (MSB first), each bit repeated ``reps`` times."""
    b = max(1, math.ceil(math.log2(alphabet_size))) if alphabet_size > 1 else 1
    words = []
    for a in range(alphabet_size):
        raw = [(a >> (b - 1 - j)) & 1 for j in range(b)]
        words.append(tuple(x for x in raw for _ in range(reps)))
    return BinaryCode(tuple(words), declared_c=reps)


# ---------------------------------------------------------------- Tseitin tester


def _clauses(op: str, g: int, a: int, b: int | None):
    """Gate-clause translation; literal = (var, polarity)."""
    if op == "NOT":
        return [((g, 1), (a, 1)), ((g, 0), (a, 0))]
    if op == "AND":
        return [((g, 0), (a, 1)), ((g, 0), (b, 1)), ((g, 1), (a, 0), (b, 0))]
    return [((g, 1), (a, 0)), ((g, 1), (b, 0)), ((g, 0), (a, 1), (b, 1))]


@dataclass(frozen=True)
class TesterOutput:
    graph: ConstraintGraph
    owner: tuple[tuple[int, int], ...]  # wire -> (vertex, slot)
    input_vertices: tuple[int, ...]  # block triples, in input order
    gate_vertices: tuple[int, ...]
    n_clauses: int


def _full() -> frozenset:
    return frozenset((a, b) for a in range(SIGMA0) for b in range(SIGMA0))


def tseitin_tester(phi: BooleanCircuit, input_blocks: Sequence[int] | None = None) -> TesterOutput:
    """Gate-by-gate 3-CNF gadget over triples of Boolean variables.

    Vertices: the input variables packed into triples (each block of
    ``input_blocks`` starts a fresh triple), then one vertex per gate holding
    ``(copy of input 1, copy of input 2, output)``. Each gate's clauses are a
    self-loop on its vertex; each local copy is tied to the wire's owner by an
    equality edge; the output's owner carries a unit-clause self-loop.
    Unused slots are unconstrained.
    """
    n = phi.n_inputs + len(phi.gates)
    if n > caps.cap("circuit"):
        raise CircuitTooLarge(f"circuit has {n} wires, cap {caps.cap('circuit')}")
    blocks = [phi.n_inputs] if input_blocks is None else list(input_blocks)
    if sum(blocks) != phi.n_inputs or any(b < 0 for b in blocks):
        raise InvalidSpec("input blocks must partition the inputs")
    owner: list[tuple[int, int]] = []
    input_vertices: list[int] = []
    nv = 0
    for size in blocks:
        for j in range(size):
            if j % SLOTS == 0:
                input_vertices.append(nv)
                nv += 1
            owner.append((nv - 1, j % SLOTS))
    gate_vertices = []
    for _ in phi.gates:
        gate_vertices.append(nv)
        owner.append((nv, 2))
        nv += 1

    edges: list[tuple[int, int]] = []
    cons: list[frozenset] = []
    n_clauses = 0
    for gi, (op, *args) in enumerate(phi.gates):
        v = gate_vertices[gi]
        out_wire = phi.n_inputs + gi
        b = args[1] if op != "NOT" else None
        for clause in _clauses(op, out_wire, args[0], b):
            slot_lits = [(2 if var == out_wire else 0 if var == args[0] else 1, pol) for var, pol in clause]
            ok = frozenset((s, s) for s in range(SIGMA0) if any(bit(s, sl) == p for sl, p in slot_lits))
            edges.append((v, v))
            cons.append(ok)
            n_clauses += 1
        reads = [(args[0], 0)] + ([(args[1], 1)] if op != "NOT" else [])
        for wire, slot in reads:
            ov, os_ = owner[wire]
            edges.append((v, ov))
            cons.append(frozenset((a, b) for a in range(SIGMA0) for b in range(SIGMA0) if bit(a, slot) == bit(b, os_)))
    ov, os_ = owner[phi.output]
    edges.append((ov, ov))
    cons.append(frozenset((s, s) for s in range(SIGMA0) if bit(s, os_) == 1))
    n_clauses += 1
    graph = ConstraintGraph(nv, SIGMA0, tuple(edges), tuple(cons))
    return TesterOutput(graph, tuple(owner), tuple(input_vertices), tuple(gate_vertices), n_clauses)


def pack_inputs(out: TesterOutput, phi: BooleanCircuit, bits: Sequence[int]) -> list[int]:
    """Honest labeling: inputs as given, gates evaluated, unused slots 0."""
    labels = [0] * out.graph.num_vertices
    for wire, val in enumerate(phi.wires(bits)):
        v, s = out.owner[wire]
        labels[v] |= val << s
    for gi, (op, *args) in enumerate(phi.gates):
        v = out.gate_vertices[gi]
        w = phi.wires(bits)
        labels[v] |= w[args[0]]
        if op != "NOT":
            labels[v] |= w[args[1]] << 1
    return labels


def input_bits(out: TesterOutput, phi: BooleanCircuit, labels: Sequence[int]) -> tuple[int, ...]:
    return tuple(bit(labels[out.owner[w][0]], out.owner[w][1]) for w in range(phi.n_inputs))


def rejection_rate(out: TesterOutput, phi: BooleanCircuit, bits: Sequence[int]) -> Fraction:
    """Minimum UNSAT over every gate-vertex extension of fixed input bits.

    Enumerates gate labels exhaustively, so only for tiny circuits.
    """
    g = out.graph
    base = pack_inputs(out, phi, bits)
    gv = list(out.gate_vertices)
    if SIGMA0 ** len(gv) > caps.cap("strategy"):
        raise CircuitTooLarge("too many gates for exhaustive extension search")
    best = None
    for combo in np.ndindex(*([SIGMA0] * len(gv))):
        lab = list(base)
        for v, s in zip(gv, combo):
            lab[v] = int(s)
        u = g.unsat_fraction(lab)
        if best is None or u < best:
            best = u
            if u == 0:
                break
    return best if best is not None else g.unsat_fraction(base)


# ---------------------------------------------------------------- robustization


def constant_false(n_inputs: int) -> BooleanCircuit:
    return BooleanCircuit(n_inputs, (("NOT", 0), ("AND", 0, n_inputs)), n_inputs + 1)


def dnf_circuit(n_inputs: int, accepted: Sequence[Sequence[int]]) -> BooleanCircuit:
    """OR over accepted points of the AND of matching literals."""
    if n_inputs < 1:
        raise InvalidSpec("need at least one input")
    if not accepted:
        return constant_false(n_inputs)
    gates: list[tuple] = [("NOT", j) for j in range(n_inputs)]
    neg = {j: n_inputs + j for j in range(n_inputs)}

    def wire() -> int:
        return n_inputs + len(gates) - 1

    terms = []
    for point in accepted:
        lits = [j if b else neg[j] for j, b in enumerate(point)]
        acc = lits[0]
        for lit in lits[1:]:
            gates.append(("AND", acc, lit))
            acc = wire()
        terms.append(acc)
    acc = terms[0]
    for t in terms[1:]:
        gates.append(("OR", acc, t))
        acc = wire()
    if acc < n_inputs:  # single one-literal term: route through a gate
        gates.append(("AND", acc, acc))
        acc = wire()
    return BooleanCircuit(n_inputs, tuple(gates), acc)


def robustize(gprime: Game, code: BinaryCode) -> list[BooleanCircuit]:
    """Per G' edge, a circuit on ``[v] + [w]`` accepting exactly the encoded allowed pairs."""
    if code.alphabet_size != gprime.alphabet_size:
        raise CodeMismatch(f"code has {code.alphabet_size} words, game alphabet is {gprime.alphabet_size}")
    ell = code.length
    out = []
    for c in gprime.constraints:
        pts = [code.encode(a) + code.encode(b) for a, b in sorted(c)]
        out.append(dnf_circuit(2 * ell, pts))
    return out


# ---------------------------------------------------------------- composition


@dataclass(frozen=True)
class Gadget:
    edge: int  # index into G' edges
    vertices: tuple[int, ...]  # global ids, sorted
    edge_range: tuple[int, int]  # [start, stop) into composed edges
    rep: int  # designated representative (first gate vertex)
    x_owners: tuple[int, ...]
    y_owners: tuple[int, ...]


@dataclass(frozen=True)
class ComposedGraph:
    graph: ConstraintGraph
    gprime: Game
    code: BinaryCode
    circuits: tuple[BooleanCircuit, ...]
    gadgets: tuple[Gadget, ...]
    x_owners: tuple[tuple[int, ...], ...]  # G' X-vertex -> owner triples of [v]
    y_owners: tuple[tuple[int, ...], ...]
    testers: tuple[TesterOutput, ...] = field(repr=False, default=())
    local_maps: tuple[tuple[int, ...], ...] = field(repr=False, default=())  # tester vertex -> global id

    @property
    def owner_vertices(self) -> tuple[int, ...]:
        return tuple(v for o in self.x_owners + self.y_owners for v in o)


def _owner_bits(owners: Sequence[int], ell: int, labels: Sequence[int]) -> tuple[int, ...]:
    return tuple(bit(labels[owners[j // SLOTS]], j % SLOTS) for j in range(ell))


def compose(
    gprime: Game,
    code: BinaryCode,
    tester: Callable[..., TesterOutput] = tseitin_tester,
) -> ComposedGraph:
    """Glue one gadget per G' edge; clique-complete gadgets; equalize edge counts."""
    circuits = robustize(gprime, code)
    ell = code.length
    per = math.ceil(ell / SLOTS)
    nv = 0
    x_owners, y_owners = [], []
    for _ in range(gprime.num_x):
        x_owners.append(tuple(range(nv, nv + per)))
        nv += per
    for _ in range(gprime.num_y):
        y_owners.append(tuple(range(nv, nv + per)))
        nv += per

    full = _full()
    blocks = []  # (vertex set, edges, constraints, rep)
    testers, local_maps = [], []
    for e, ((x, y), circ) in enumerate(zip(gprime.edges, circuits)):
        out = tester(circ, input_blocks=[ell, ell])
        gmap = list(x_owners[x]) + list(y_owners[y])
        if len(out.input_vertices) != len(gmap):
            raise InvalidSpec("tester input layout does not match the code length")
        vmap = {}
        for local, glob in zip(out.input_vertices, gmap):
            vmap[local] = glob
        for local in range(out.graph.num_vertices):
            if local not in vmap:
                vmap[local] = nv
                nv += 1
        verts = sorted(set(vmap.values()))
        if len(verts) > caps.cap("gadget"):
            raise GadgetTooLarge(f"gadget {e} has {len(verts)} vertices")
        edges = [(vmap[u], vmap[v]) for u, v in out.graph.edges]
        cons = list(out.graph.constraints)
        linked = {frozenset(p) for p in edges}
        for a, b in combinations(verts, 2):
            if frozenset((a, b)) not in linked:
                edges.append((a, b))
                cons.append(full)
        rep = vmap[out.gate_vertices[0]]
        blocks.append((tuple(verts), edges, cons, rep, x, y))
        testers.append(out)
        local_maps.append(tuple(vmap[i] for i in range(out.graph.num_vertices)))

    target = max(len(b[1]) for b in blocks) if blocks else 0
    all_edges, all_cons, gadgets = [], [], []
    for e, (verts, edges, cons, rep, x, y) in enumerate(blocks):
        start = len(all_edges)
        pad = target - len(edges)
        all_edges.extend(edges + [(rep, rep)] * pad)
        all_cons.extend(cons + [full] * pad)
        gadgets.append(Gadget(e, verts, (start, len(all_edges)), rep, x_owners[x], y_owners[y]))
    graph = ConstraintGraph(nv, SIGMA0, tuple(all_edges), tuple(all_cons))
    return ComposedGraph(
        graph, gprime, code, tuple(circuits), tuple(gadgets),
        tuple(x_owners), tuple(y_owners), tuple(testers), tuple(local_maps),
    )


def encode_strategy(composed: ComposedGraph, s: Strategy) -> list[int]:
    """Labeling of the composed graph from a G' strategy (honest gate values)."""
    code, ell = composed.code, composed.code.length
    labels = [0] * composed.graph.num_vertices
    for owners, a in list(zip(composed.x_owners, s.psi_x)) + list(zip(composed.y_owners, s.psi_y)):
        for j, b in enumerate(code.encode(a)):
            labels[owners[j // SLOTS]] |= b << (j % SLOTS)
    for gad, circ, out, vmap in zip(composed.gadgets, composed.circuits, composed.testers, composed.local_maps):
        bits = _owner_bits(gad.x_owners, ell, labels) + _owner_bits(gad.y_owners, ell, labels)
        local = pack_inputs(out, circ, bits)
        for lv in out.gate_vertices:
            labels[vmap[lv]] = local[lv]
    return labels


def gate_best_response(composed: ComposedGraph, labels: Sequence[int]) -> list[int]:
    """Keep owner labels; set every gate vertex to its honest value."""
    ell = composed.code.length
    out_labels = list(labels)
    for gad, circ, out, vmap in zip(composed.gadgets, composed.circuits, composed.testers, composed.local_maps):
        bits = _owner_bits(gad.x_owners, ell, labels) + _owner_bits(gad.y_owners, ell, labels)
        local = pack_inputs(out, circ, bits)
        for lv in out.gate_vertices:
            out_labels[vmap[lv]] = local[lv]
    return out_labels


# ---------------------------------------------------------------- powering


def bfs_cloud(adj: list[list[int]], v: int, t: int) -> tuple[int, ...]:
    dist = {v: 0}
    dq = deque([v])
    while dq:
        u = dq.popleft()
        if dist[u] == t:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                dq.append(w)
    return tuple(sorted(dist))


@dataclass(frozen=True)
class PoweredGraph:
    """Clouds are BFS balls of radius t; walks are kept as endpoint counts.

    ``walks[(u, v)]`` is the number of (2t+1)-step walks from u to v, where a
    step follows an edge entry in either direction and a self-loop once.
    """

    base: ConstraintGraph
    t: int
    clouds: tuple[tuple[int, ...], ...]
    walks: dict = field(repr=False)

    @property
    def walk_count(self) -> int:
        return sum(self.walks.values())

    @cached_property
    def membership(self) -> np.ndarray:
        n = self.base.num_vertices
        m = np.zeros((n, n), dtype=bool)
        for v, c in enumerate(self.clouds):
            m[v, list(c)] = True
        return m


def power(graph: ConstraintGraph, t: int) -> PoweredGraph:
    if t < 0:
        raise InvalidSpec("t must be >= 0")
    n = graph.num_vertices
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in graph.edges:
        adj[u].append(v)
        if u != v:
            adj[v].append(u)
    adj = [sorted(set(a)) for a in adj]
    clouds = []
    for v in range(n):
        c = bfs_cloud(adj, v, t)
        if len(c) > caps.cap("cloud"):
            raise CloudTooLarge(f"cloud of {v} has {len(c)} vertices")
        clouds.append(c)
    A = graph.adjacency.astype(object)
    P = np.identity(n, dtype=np.int64).astype(object)
    for _ in range(2 * t + 1):
        P = P.dot(A)
    total = int(P.sum())
    if total > caps.cap("walks"):
        raise WalkSpaceTooLarge(f"{total} walks exceeds cap")
    walks = {(u, v): int(P[u, v]) for u in range(n) for v in range(n) if P[u, v]}
    return PoweredGraph(graph, t, tuple(clouds), walks)


def walk_count_bruteforce(graph: ConstraintGraph, length: int) -> int:
    """Count walks by repeated neighbor expansion (independent of matrix powers)."""
    n = graph.num_vertices
    steps: list[list[int]] = [[] for _ in range(n)]
    for u, v in graph.edges:
        steps[u].append(v)
        if u != v:
            steps[v].append(u)
    ways = [1] * n
    for _ in range(length):
        nxt = [0] * n
        for u in range(n):
            for v in steps[u]:
                nxt[v] += ways[u]
        ways = nxt
    return sum(ways)


def superlabeling_from_labeling(powered: PoweredGraph, labels: Sequence[int]) -> np.ndarray:
    """Every vertex claims the true labels of its cloud; -1 outside the cloud."""
    lab = np.asarray(labels, dtype=np.int64)
    out = np.where(powered.membership, lab[None, :], -1)
    return out


def _check_lambda(powered: PoweredGraph, Lambda: np.ndarray) -> np.ndarray:
    Lambda = np.asarray(Lambda, dtype=np.int64)
    n = powered.base.num_vertices
    if Lambda.shape != (n, n):
        raise UndefinedVertex(f"super-labeling must be {n}x{n}")
    if (Lambda[powered.membership] < 0).any():
        raise UndefinedVertex("super-labeling misses a cloud member")
    return Lambda


def powered_satisfied(powered: PoweredGraph, Lambda: np.ndarray) -> dict:
    """Per ordered endpoint pair: does the walk constraint hold?

    A walk u -> v accepts iff both clouds are internally consistent with the
    base constraints, the two claims agree on the cloud intersection, and
    every base edge from cloud(u) to cloud(v) holds under (u's claim, v's claim).
    """
    Lambda = _check_lambda(powered, Lambda)
    g = powered.base
    eu, ev = g.endpoints
    mem = powered.membership
    n = g.num_vertices
    valid = np.ones(n, dtype=bool)
    for v in range(n):
        inside = mem[v, eu] & mem[v, ev]
        if inside.any():
            idx = np.nonzero(inside)[0]
            valid[v] = g.allowed[idx, Lambda[v, eu[idx]], Lambda[v, ev[idx]]].all()
    out = {}
    for (u, v) in powered.walks:
        ok = bool(valid[u] and valid[v])
        if ok:
            common = mem[u] & mem[v]
            ok = bool((Lambda[u, common] == Lambda[v, common]).all())
        if ok:
            fwd = mem[u, eu] & mem[v, ev]
            bwd = mem[u, ev] & mem[v, eu]
            i = np.nonzero(fwd)[0]
            j = np.nonzero(bwd)[0]
            ok = bool(g.allowed[i, Lambda[u, eu[i]], Lambda[v, ev[i]]].all()) and bool(
                g.allowed[j, Lambda[v, eu[j]], Lambda[u, ev[j]]].all()
            )
        out[(u, v)] = ok
    return out


def powered_value(powered: PoweredGraph, Lambda: np.ndarray) -> Fraction:
    sat = powered_satisfied(powered, Lambda)
    good = sum(c for key, c in powered.walks.items() if sat[key])
    return Fraction(good, powered.walk_count)


# ---------------------------------------------------------------- projection


@dataclass(frozen=True)
class ProjectionReport:
    strategy: Strategy
    gadget_satisfied: tuple[bool, ...]
    gadget_fraction: Fraction
    decoded_value: Fraction
    inequality_holds: bool

    def to_dict(self) -> dict:
        return {
            "psi_x": list(self.strategy.psi_x),
            "psi_y": list(self.strategy.psi_y),
            "gadget_satisfied": list(self.gadget_satisfied),
            "gadget_fraction": self.gadget_fraction,
            "decoded_value": self.decoded_value,
            "inequality_holds": self.inequality_holds,
        }


def decode_owners(composed: ComposedGraph, self_claims: Sequence[int]) -> Strategy:
    ell, code = composed.code.length, composed.code
    px = [code.decode(_owner_bits(o, ell, self_claims)) for o in composed.x_owners]
    py = [code.decode(_owner_bits(o, ell, self_claims)) for o in composed.y_owners]
    return Strategy(px, py)


def gadget_satisfied(composed: ComposedGraph, Lambda: np.ndarray, self_claims: Sequence[int]) -> list[bool]:
    g = composed.graph
    eu, ev = g.endpoints
    out = []
    for gad in composed.gadgets:
        claim = Lambda[gad.rep]
        lo, hi = gad.edge_range
        idx = np.arange(lo, hi)
        ok = bool(g.allowed[idx, claim[eu[idx]], claim[ev[idx]]].all())
        owners = list(gad.x_owners + gad.y_owners)
        ok = ok and all(int(claim[o]) == int(self_claims[o]) for o in owners)
        out.append(ok)
    return out


def project_superlabeling(powered: PoweredGraph, Lambda: np.ndarray, composed: ComposedGraph) -> ProjectionReport:
    """Decode a G' strategy from the owners' self-claims.

    A gadget counts as satisfied when its representative's claim satisfies
    every constraint of the gadget and matches what each owner claims for
    itself; then the owners hold a codeword pair the edge accepts, so the
    decoded strategy wins that edge. Hence fraction <= decoded value.
    """
    if powered.base is not composed.graph and powered.base != composed.graph:
        raise NotComposedGraph("powered graph was not built from this composition")
    if powered.t < 1:
        raise NotComposedGraph("projection needs t >= 1 so clouds cover gadgets")
    Lambda = _check_lambda(powered, Lambda)
    for gad in composed.gadgets:
        if not powered.membership[gad.rep, list(gad.vertices)].all():
            raise NotComposedGraph(f"cloud of representative {gad.rep} misses part of its gadget")
    self_claims = [int(Lambda[v, v]) for v in range(composed.graph.num_vertices)]
    strat = decode_owners(composed, self_claims)
    sat = gadget_satisfied(composed, Lambda, self_claims)
    frac = Fraction(sum(sat), len(sat))
    val = strategy_value(composed.gprime, strat)
    return ProjectionReport(strat, tuple(sat), frac, val, frac <= val)


# ---------------------------------------------------------------- search


@dataclass(frozen=True)
class SearchReport:
    candidates: int
    best_fraction: Fraction
    best_decoded_value: Fraction
    value_gprime: Fraction
    violations: int  # candidates whose gadget fraction exceeded val(G')
    exhaustive_owner_part: bool

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.best_fraction <= self.value_gprime

    def to_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "best_fraction": self.best_fraction,
            "best_decoded_value": self.best_decoded_value,
            "value_gprime": self.value_gprime,
            "violations": self.violations,
            "exhaustive_owner_part": self.exhaustive_owner_part,
            "passed": self.passed,
        }


class _BatchEvaluator:
    """Vectorized gadget-satisfaction over candidate (self-claims, rep-claims)."""

    def __init__(self, composed: ComposedGraph):
        self.c = composed
        g = composed.graph
        eu, ev = g.endpoints
        self.per_gadget = []
        for gad in composed.gadgets:
            lo, hi = gad.edge_range
            idx = np.arange(lo, hi)
            idx = idx[~g.trivial[idx]]
            self.per_gadget.append((idx, eu[idx], ev[idx], np.array(gad.x_owners + gad.y_owners)))

    def fractions(self, self_claims: np.ndarray, rep_claims: list[np.ndarray]) -> np.ndarray:
        """self_claims (B, n); rep_claims[e] (B, n) claims of gadget e's rep."""
        allowed = self.c.graph.allowed
        hits = np.zeros(self_claims.shape[0], dtype=np.int64)
        for (idx, u, v, owners), claim in zip(self.per_gadget, rep_claims):
            ok = allowed[idx[None, :], claim[:, u], claim[:, v]].all(axis=1)
            ok &= (claim[:, owners] == self_claims[:, owners]).all(axis=1)
            hits += ok
        return hits


def search_superlabelings(
    composed: ComposedGraph,
    powered: PoweredGraph,
    candidates: int = 10_000,
    seed: int = 0,
    exact_value: Fraction | None = None,
) -> SearchReport:
    """Hunt for a super-labeling whose gadget fraction beats val(G').

    Candidates: every assignment of the owners' code bits with honest gates
    (exhaustive when it fits the budget), then random self-claims paired with
    representative claims that are honest, perturbed, or locally accepting
    codeword pairs disagreeing with the owners.
    """
    g = composed.graph
    n = g.num_vertices
    m = len(composed.gadgets)
    ell = composed.code.length
    vprime = value_exact(composed.gprime).value if exact_value is None else exact_value
    n_owner_blocks = len(composed.x_owners) + len(composed.y_owners)
    rng = derive_rng(seed, "superlabel-search")
    ev = _BatchEvaluator(composed)

    selfs: list[list[int]] = []
    reps: list[list[list[int]]] = []
    owner_space = 2 ** (ell * n_owner_blocks)
    exhaustive = owner_space <= candidates // 2
    if exhaustive:
        for mask in range(owner_space):
            lab = [0] * n
            for blk, ob in enumerate(composed.x_owners + composed.y_owners):
                for j in range(ell):
                    b = (mask >> (blk * ell + j)) & 1
                    lab[ob[j // SLOTS]] |= b << (j % SLOTS)
            lab = gate_best_response(composed, lab)
            selfs.append(lab)
            reps.append([lab] * m)
    while len(selfs) < candidates:
        lab = [int(v) for v in rng.integers(0, SIGMA0, size=n)]
        mode = int(rng.integers(0, 3))
        if mode == 0:
            lab = gate_best_response(composed, lab)
            rc = [lab] * m
        elif mode == 1:
            honest = gate_best_response(composed, lab)
            rc = []
            for _ in range(m):
                r = list(honest)
                flips = rng.integers(0, n, size=int(rng.integers(1, 4)))
                for f in flips:
                    r[int(f)] = int(rng.integers(0, SIGMA0))
                rc.append(r)
        else:
            rc = []
            for gad, circ in zip(composed.gadgets, composed.circuits):
                acc = circ.truth_table()
                r = list(lab)
                if acc:
                    pt = acc[int(rng.integers(0, len(acc)))]
                    for j, b in enumerate(pt):
                        ob = gad.x_owners if j < ell else gad.y_owners
                        jj = j % ell
                        v = ob[jj // SLOTS]
                        r[v] = (r[v] & ~(1 << (jj % SLOTS))) | (b << (jj % SLOTS))
                    if rng.integers(0, 2):
                        for o in gad.x_owners + gad.y_owners:
                            lab[o] = r[o]
                r = gate_best_response(composed, r)
                rc.append(r)
        selfs.append(lab)
        reps.append(rc)

    S = np.array(selfs, dtype=np.int64)
    R = [np.array([rc[e] for rc in reps], dtype=np.int64) for e in range(m)]
    hits = ev.fractions(S, R)
    best_i = int(np.argmax(hits))
    best = Fraction(int(hits[best_i]), m)
    decoded = strategy_value(composed.gprime, decode_owners(composed, selfs[best_i]))
    violations = int((hits * vprime.denominator > vprime.numerator * m).sum())
    return SearchReport(len(selfs), best, decoded, vprime, violations, exhaustive)


def lambda_from_candidate(powered: PoweredGraph, composed: ComposedGraph, self_claims, rep_claims) -> np.ndarray:
    """Materialize a candidate: every vertex claims ``self_claims`` on its cloud,
    except each gadget representative, which claims ``rep_claims[e]``."""
    L = superlabeling_from_labeling(powered, self_claims)
    for gad, rc in zip(composed.gadgets, rep_claims):
        row = np.asarray(rc, dtype=np.int64)
        mask = powered.membership[gad.rep]
        L[gad.rep, mask] = row[mask]
    return L


# ---------------------------------------------------------------- randomness


def powered_bits(num_vertices: int, d: int, t: int) -> float:
    """``log2 |V| + (2t+1) log2 d``: pick a start vertex, then 2t+1 neighbor steps."""
    return math.log2(num_vertices) + (2 * t + 1) * math.log2(d)


def repetition_rounds(vprime: Fraction) -> int | None:
    """Smallest k >= 1 with ``8^k >= 1/v'``, the standard-repetition comparison point."""
    vprime = Fraction(vprime)
    if vprime <= 0:
        return None
    k = 1
    while vprime * 8**k < 1:
        k += 1
    return k


@dataclass(frozen=True)
class RandomnessReport:
    edges_gprime: int
    bits_gprime: float
    edges_composed: int
    bits_composed: float
    vertices: int
    max_degree: int
    t: int
    bits_powered: float
    value_gprime: Fraction
    repetition_k: int | None
    bits_repetition: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def randomness_accounting(gprime: Game, composed: ComposedGraph, powered: PoweredGraph, vprime: Fraction | None = None) -> RandomnessReport:
    vprime = value_exact(gprime).value if vprime is None else Fraction(vprime)
    d = powered.base.max_degree
    k = repetition_rounds(vprime)
    return RandomnessReport(
        edges_gprime=gprime.size,
        bits_gprime=math.log2(gprime.size),
        edges_composed=composed.graph.size,
        bits_composed=math.log2(composed.graph.size),
        vertices=powered.base.num_vertices,
        max_degree=d,
        t=powered.t,
        bits_powered=powered_bits(powered.base.num_vertices, d, powered.t),
        value_gprime=vprime,
        repetition_k=k,
        bits_repetition=None if k is None else k * math.log2(gprime.size),
    )
