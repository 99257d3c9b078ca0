"""Trotter circuit compilation, routing onto coupling maps, and gate metrics.

Each Pauli exponential ``exp(-i c P dt)`` is compiled as a basis change, a CX
ladder onto the last active qubit, ``RZ(2 c dt)`` and the mirrored sequence.
The ladder visits the qubits carrying a ``Z`` letter first, so for the mapped
cavity Hamiltonians the first matter qubit ends up as the hub that talks to
every photonic register.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .mappers import RegisterLayout
from .pauli import PauliString, PauliSum

ONE_QUBIT = ("H", "S", "Sdg", "RZ", "RX", "X")
TWO_QUBIT = ("CX", "SWAP")
HERMITIAN_TOL = 1e-10


class NonHermitianError(ValueError):
    pass


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None
    fold_eligible: bool = False
    copy: int = field(default=0, compare=False)  # 1, 2 for the inserted copies of a folded gate

    def __post_init__(self):
        if self.kind in ONE_QUBIT:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on one qubit")
        elif self.kind in TWO_QUBIT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} needs two distinct qubits")
        else:
            raise ValueError(f"unknown gate {self.kind!r}")
        if self.kind in ("RZ", "RX") and self.theta is None:
            raise ValueError(f"{self.kind} needs an angle")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT

    @property
    def cx_cost(self) -> int:
        return {"CX": 1, "SWAP": 3}.get(self.kind, 0)

    def remap(self, mapping) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.theta, self.fold_eligible, self.copy)


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (control, target), fold_eligible=True)


@dataclass(frozen=True)
class GateCircuit:
    """Gate list plus the end index of every Trotter step.

    ``steps[k]`` is the gate index one past the last gate of step ``k``.
    """

    n_qubits: int
    gates: tuple[Gate, ...]
    steps: tuple[int, ...] = ()
    dt: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} outside a {self.n_qubits}-qubit circuit")
        prev = 0
        for s in self.steps:
            if s < prev or s > len(self.gates):
                raise ValueError("step markers must be non-decreasing and within the gate list")
            prev = s

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def step_slices(self) -> list[slice]:
        out, start = [], 0
        for end in self.steps:
            out.append(slice(start, end))
            start = end
        return out

    def step_gates(self, k: int) -> tuple[Gate, ...]:
        return self.gates[self.step_slices()[k]]

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def cx_count(self) -> int:
        return sum(g.cx_cost for g in self.gates)

    def __len__(self):
        return len(self.gates)


def from_steps(n_qubits: int, steps: Sequence[Iterable[Gate]], dt: float = 0.0,
               meta: dict | None = None) -> GateCircuit:
    gates, bounds = [], []
    for step in steps:
        gates.extend(step)
        bounds.append(len(gates))
    return GateCircuit(n_qubits, tuple(gates), tuple(bounds), dt, dict(meta or {}))


# ---------------------------------------------------------------- compilation

def ladder_order(string: PauliString) -> list[int]:
    """Active qubits in ladder order: ``Z`` letters first, then X/Y, each ascending."""
    support = string.support
    zs = [q for q in support if string.letter(q) == "Z"]
    rest = [q for q in support if string.letter(q) != "Z"]
    return zs + rest


def pauli_exponential(coef: float, string: PauliString, dt: float) -> list[Gate]:
    """Gates for ``exp(-i coef P dt)``."""
    order = ladder_order(string)
    if not order:
        return []
    pre, post = [], []
    for q in order:
        letter = string.letter(q)
        if letter == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif letter == "Y":
            pre += [Gate("Sdg", (q,)), Gate("H", (q,))]
            post += [Gate("H", (q,)), Gate("S", (q,))]
    ladder = [cx(a, b) for a, b in zip(order, order[1:])]
    rot = Gate("RZ", (order[-1],), 2.0 * coef * dt)
    return pre + ladder + [rot] + ladder[::-1] + post


def check_hermitian(h: PauliSum, tol: float = HERMITIAN_TOL) -> PauliSum:
    h = h.simplify()
    bad = [(c, s.label) for c, s in h.terms if abs(complex(c).imag) > tol]
    if bad:
        c, label = bad[0]
        raise NonHermitianError(f"term {label} has complex coefficient {c}; its adjoint partner is missing")
    return h


def term_class(string: PauliString, layout: RegisterLayout | None) -> tuple[int, int]:
    """(class, register) sort key: 0 matter, 1 photonic/hopping, 2 interaction."""
    if layout is None:
        return (0, 0)
    regs = sorted({layout.register_of(q) for q in string.support})
    kinds = {layout.slots[r].kind for r in regs}
    if kinds == {"fermionic"}:
        return (0, regs[0])
    bosonic = [r for r in regs if layout.slots[r].kind == "bosonic"]
    if "fermionic" in kinds:
        return (2, bosonic[0])
    return (1, bosonic[0])


def ordered_terms(h: PauliSum, layout: RegisterLayout | None = None) -> list[tuple[float, PauliString]]:
    """Hermitian, identity-free terms in the fixed matter / photonic / interaction order."""
    h = check_hermitian(h)
    terms = [(complex(c).real, s) for c, s in h.terms if not s.is_identity()]
    # sorted() is stable, so terms keep their mapped order within a class
    return sorted(terms, key=lambda cs: term_class(cs[1], layout))


def trotterize(h: PauliSum, t: float, d: int, layout: RegisterLayout | None = None) -> GateCircuit:
    """First-order product formula ``(Π_j exp(-i h_j t/d))^d``; identity terms are a global phase."""
    if d < 0:
        raise ValueError("step count must be non-negative")
    dt = t / d if d else 0.0
    step: list[Gate] = []
    for coef, string in ordered_terms(h, layout):
        step.extend(pauli_exponential(coef, string, dt))
    return from_steps(h.n_qubits, [step] * d, dt, {"t": t})


def n_steps_for(t_final: float, dt: float) -> int:
    """Whole steps of length ``dt`` that fit in ``t_final``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return int(np.floor(t_final / dt + 1e-9))


# ---------------------------------------------------------------- connectivity

def interaction_edges(circ: GateCircuit) -> dict[tuple[int, int], int]:
    """Undirected two-qubit gate counts per qubit pair (SWAP = 3)."""
    edges: dict[tuple[int, int], int] = {}
    for g in circ.gates:
        if g.is_two_qubit:
            key = tuple(sorted(g.qubits))
            edges[key] = edges.get(key, 0) + g.cx_cost
    return edges


def required_degree(h, layout: RegisterLayout | None = None, mode: str = "ladder") -> dict[int, int]:
    """Distinct two-qubit partners per logical qubit.

    ``mode="ladder"`` (default) counts partners through the CX ladders that
    the compiler actually emits; ``mode="support"`` counts every pair that
    shares a multi-qubit term. A :class:`GateCircuit` is also accepted.
    """
    partners: dict[int, set] = {}
    if isinstance(h, GateCircuit):
        n = h.n_qubits
        pairs = interaction_edges(h).keys()
    else:
        n = h.n_qubits
        pairs = set()
        for _, s in ordered_terms(h, layout):
            order = ladder_order(s)
            if mode == "ladder":
                pairs.update(tuple(sorted(p)) for p in zip(order, order[1:]))
            else:
                pairs.update((a, b) for i, a in enumerate(order) for b in order[i + 1:])
                pairs = {tuple(sorted(p)) for p in pairs}
    for a, b in pairs:
        partners.setdefault(a, set()).add(b)
        partners.setdefault(b, set()).add(a)
    return {q: len(partners.get(q, ())) for q in range(n)}


@dataclass(frozen=True)
class CouplingMap:
    edges: tuple[tuple[int, int], ...]
    name: str = "custom"

    @property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_edges_from(self.edges)
        return g

    @property
    def nodes(self) -> list[int]:
        return sorted({q for e in self.edges for q in e})

    def max_degree(self) -> int:
        return max((d for _, d in self.graph.degree()), default=0)

    @classmethod
    def line(cls, n: int) -> CouplingMap:
        return cls(tuple((i, i + 1) for i in range(n - 1)), f"line({n})")

    @classmethod
    def heavy_hex(cls, rows: int = 3, cols: int = 27) -> CouplingMap:
        """Heavy-hex patch: rows of ``cols`` qubits joined by degree-2 bridge qubits.

        Between rows ``r`` and ``r+1`` the bridges sit at columns ``0 mod 4``
        for even ``r`` and ``2 mod 4`` for odd ``r``, so no qubit exceeds degree 3.
        """
        index = {(r, c): r * cols + c for r in range(rows) for c in range(cols)}
        edges = [(index[r, c], index[r, c + 1]) for r in range(rows) for c in range(cols - 1)]
        nxt = rows * cols
        for r in range(rows - 1):
            for c in range(0 if r % 2 == 0 else 2, cols, 4):
                edges += [(index[r, c], nxt), (nxt, index[r + 1, c])]
                nxt += 1
        return cls(tuple(edges), f"heavy_hex({rows},{cols})")

    @classmethod
    def preset(cls, name: str, n_qubits: int) -> CouplingMap:
        if name == "line":
            return cls.line(n_qubits)
        if name == "heavy_hex":
            return cls.heavy_hex(3, max(15, n_qubits + 6))
        if name == "all_to_all":
            return cls(tuple((a, b) for a in range(n_qubits) for b in range(a + 1, n_qubits)), "all_to_all")
        raise ValueError(f"unknown coupling map preset {name!r}")


def _room(g: nx.Graph, node, taken: set, radius: int = 3) -> int:
    seen = nx.single_source_shortest_path_length(g, node, cutoff=radius)
    return sum(1 for v in seen if v not in taken)


def select_layout(circ_or_edges, cmap: CouplingMap, n_qubits: int | None = None) -> dict[int, int]:
    """Deterministic greedy placement of logical qubits on the coupling map.

    The root is the centre of the interaction graph (feasible degree preferred),
    placed on a central maximal-degree physical node. Children are placed in
    breadth-first order, larger subtrees taking the roomier free neighbours;
    qubits without a free adjacent slot go to the closest frontier node, which
    keeps the used region connected.
    """
    if isinstance(circ_or_edges, GateCircuit):
        n_qubits = circ_or_edges.n_qubits
        weights = interaction_edges(circ_or_edges)
    else:
        weights = dict(circ_or_edges)
        if n_qubits is None:
            n_qubits = 1 + max((q for e in weights for q in e), default=-1)
    logical = nx.Graph()
    logical.add_nodes_from(range(n_qubits))
    logical.add_edges_from(weights)
    phys = cmap.graph
    if phys.number_of_nodes() < n_qubits:
        raise RoutingError(f"coupling map has {phys.number_of_nodes()} qubits, need {n_qubits}")
    max_deg = cmap.max_degree()

    comps = sorted(nx.connected_components(logical), key=lambda c: (-len(c), min(c)))
    main = logical.subgraph(comps[0])
    ecc = nx.eccentricity(main)
    root = min(main.nodes, key=lambda q: (ecc[q], main.degree(q) > max_deg, -main.degree(q), q))
    p_ecc = nx.eccentricity(phys)
    p_root = min(phys.nodes, key=lambda p: (-phys.degree(p), p_ecc[p], p))

    # BFS tree and subtree sizes over the logical graph
    parent = {root: None}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(logical.neighbors(u)):
            if v not in parent:
                parent[v] = u
                order.append(v)
                queue.append(v)
    for comp in comps[1:]:
        for v in sorted(comp):
            if v not in parent:
                parent[v] = None
                order.append(v)
    size = {q: 1 for q in order}
    for q in reversed(order):
        if parent[q] is not None:
            size[parent[q]] += size[q]

    placement = {root: p_root}
    taken = {p_root}
    children: dict[int, list[int]] = {}
    for q in order[1:]:
        children.setdefault(parent[q], []).append(q)

    def frontier_slot(anchor_phys):
        frontier = {v for p in taken for v in phys.neighbors(p) if v not in taken}
        dist = nx.single_source_shortest_path_length(phys, anchor_phys)
        return min(frontier, key=lambda v: (dist.get(v, 1 << 30), v))

    for q in order:
        if q not in placement:
            anchor = placement[parent[q]] if parent[q] is not None else p_root
            slot = frontier_slot(anchor)
            placement[q] = slot
            taken.add(slot)
        kids = sorted(children.get(q, []), key=lambda c: (-size[c], -weights.get(tuple(sorted((q, c))), 0), c))
        for kid in kids:
            free = [v for v in phys.neighbors(placement[q]) if v not in taken]
            if not free:
                break
            best = max(free, key=lambda v: (_room(phys, v, taken | {v}), -v))
            placement[kid] = best
            taken.add(best)
    return placement


def route(circ: GateCircuit, cmap: CouplingMap, layout: dict[int, int] | None = None) -> GateCircuit:
    """Swap-and-return routing.

    Distant pairs are made adjacent by moving the second qubit along a shortest
    path. The displaced qubits stay put while later gates remain executable and
    are swapped back as soon as a gate conflicts, and always at the end of a
    Trotter step, so every step starts and ends in the home layout.

    Only the subgraph induced by the occupied nodes is used, and the output is
    expressed in home-slot indices (slot ``i`` is where logical qubit ``i``
    lives), so the routed circuit acts on the same register as the input.
    """
    if layout is None:
        layout = select_layout(circ, cmap)
    if len(set(layout.values())) != len(layout) or set(layout) != set(range(circ.n_qubits)):
        raise RoutingError("layout must place every logical qubit on a distinct node")
    home = {p: q for q, p in layout.items()}
    sub = cmap.graph.subgraph(layout.values())
    if not nx.is_connected(sub) and circ.n_qubits > 1:
        raise RoutingError("layout occupies a disconnected set of nodes")
    g = nx.relabel_nodes(sub, home)

    pos = list(range(circ.n_qubits))      # logical -> slot
    occupant = list(range(circ.n_qubits))  # slot -> logical
    pending: list[tuple[int, int]] = []
    out: list[Gate] = []
    bounds, swaps = [], []
    n_swaps = 0

    def do_swap(a: int, b: int):
        nonlocal n_swaps
        out.append(Gate("SWAP", (a, b)))
        la, lb = occupant[a], occupant[b]
        occupant[a], occupant[b] = lb, la
        pos[la], pos[lb] = b, a
        n_swaps += 1

    def restore():
        while pending:
            a, b = pending.pop()
            do_swap(a, b)

    def adjacent(u, v):
        return g.has_edge(pos[u], pos[v])

    for sl in circ.step_slices():
        for gate in circ.gates[sl]:
            if gate.is_two_qubit:
                a, b = gate.qubits
                if not adjacent(a, b) and pending:
                    restore()
                if not adjacent(a, b):
                    # walk b along the path until it sits next to a
                    path = nx.shortest_path(g, pos[b], pos[a])
                    for s, t in zip(path[:-2], path[1:-1]):
                        do_swap(s, t)
                        pending.append((s, t))
            out.append(Gate(gate.kind, tuple(pos[q] for q in gate.qubits), gate.theta, gate.fold_eligible))
        restore()
        bounds.append(len(out))
        swaps.append(n_swaps - sum(swaps))
    meta = dict(circ.meta, swaps_per_step=swaps, layout=dict(layout), coupling_map=cmap.name)
    return GateCircuit(circ.n_qubits, tuple(out), tuple(bounds), circ.dt, meta)


# ---------------------------------------------------------------- metrics

@dataclass
class GateMetrics:
    total_cx: int
    cx_per_step: list[int]
    swaps_per_step: list[int]
    qubit_load: np.ndarray           # CX per qubit, SWAP counted as 3 on both
    qubit_load_no_swap: np.ndarray   # CX per qubit from non-SWAP gates only
    step_max_load: list[int]
    step_max_load_no_swap: list[int]
    max_degree: int

    @property
    def n_steps(self) -> int:
        return len(self.cx_per_step)

    def per_step_load(self, qubit: int, include_swaps: bool = False) -> float:
        load = self.qubit_load if include_swaps else self.qubit_load_no_swap
        return load[qubit] / max(self.n_steps, 1)

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "total_cx", "swaps", "max_qubit_load"])
        cumulative = 0
        for k, (n, s, m) in enumerate(zip(self.cx_per_step, self.swaps_per_step, self.step_max_load), 1):
            cumulative += n
            w.writerow([k, cumulative, s, m])
        return buf.getvalue()


def gate_metrics(circ: GateCircuit) -> GateMetrics:
    n = circ.n_qubits
    load = np.zeros(n, dtype=int)
    load_ns = np.zeros(n, dtype=int)
    cx_steps, swap_steps, max_steps, max_steps_ns = [], [], [], []
    slices = circ.step_slices() if circ.steps else ([slice(0, len(circ.gates))] if circ.gates else [])
    for sl in slices:
        step_load = np.zeros(n, dtype=int)
        step_ns = np.zeros(n, dtype=int)
        n_cx = n_sw = 0
        for g in circ.gates[sl]:
            if not g.is_two_qubit:
                continue
            n_cx += g.cx_cost
            n_sw += g.kind == "SWAP"
            for q in g.qubits:
                step_load[q] += g.cx_cost
                if g.kind == "CX":
                    step_ns[q] += 1
        load += step_load
        load_ns += step_ns
        cx_steps.append(n_cx)
        swap_steps.append(n_sw)
        max_steps.append(int(step_load.max()) if n else 0)
        max_steps_ns.append(int(step_ns.max()) if n else 0)
    deg = required_degree(circ)
    return GateMetrics(
        total_cx=sum(cx_steps),
        cx_per_step=cx_steps,
        swaps_per_step=swap_steps,
        qubit_load=load,
        qubit_load_no_swap=load_ns,
        step_max_load=max_steps,
        step_max_load_no_swap=max_steps_ns,
        max_degree=max(deg.values(), default=0),
    )
