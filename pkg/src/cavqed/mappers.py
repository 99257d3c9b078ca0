"""Qubit encodings of second-quantized operators.

* :class:`BravyiKitaevMapper` - fermions, Fenwick-tree Bravyi-Kitaev encoding.
* :class:`BosonicLinearMapper` - one qubit per Fock level (unary flag).
* :class:`BosonicLogarithmicMapper` - Fock number stored in binary.
* :func:`map_mixed` - maps each register with its own mapper and concatenates
  the registers, first registry entry on the least significant qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .operators import ANNIHILATE, CREATE, BosonicOp, FermionicOp, LadderOp, MixedOp
from .pauli import PauliSum


class MapperError(ValueError):
    """No (or an incompatible) mapper was supplied for a register."""


def _sigma_plus(n_qubits: int, qubit: int) -> PauliSum:
    """|0><1| on ``qubit`` = (X + iY) / 2."""
    return PauliSum(n_qubits, [(0.5, _one(n_qubits, qubit, "X")), (0.5j, _one(n_qubits, qubit, "Y"))])


def _sigma_minus(n_qubits: int, qubit: int) -> PauliSum:
    """|1><0| on ``qubit`` = (X - iY) / 2."""
    return PauliSum(n_qubits, [(0.5, _one(n_qubits, qubit, "X")), (-0.5j, _one(n_qubits, qubit, "Y"))])


def _one(n_qubits: int, qubit: int, letter: str) -> str:
    label = ["I"] * n_qubits
    label[n_qubits - 1 - qubit] = letter
    return "".join(label)


def _product(ops: list[PauliSum], n_qubits: int) -> PauliSum:
    result = PauliSum.identity(n_qubits)
    for op in ops:
        result = result @ op
    return result


class _LadderMapper:
    kind = ""

    def num_qubits(self, n_modes: int) -> int:
        raise NotImplementedError

    def ladder(self, kind: str, mode: int, n_modes: int) -> PauliSum:
        raise NotImplementedError

    def map(self, op: LadderOp) -> PauliSum:
        if op.kind != self.kind:
            raise MapperError(f"{type(self).__name__} cannot map a {op.kind} operator")
        n = self.num_qubits(op.n_modes)
        data = []
        for term in op.terms:
            factors = [self.ladder(kind, mode, op.n_modes) for kind, mode in term.actions]
            data.extend((term.coefficient * c, s) for c, s in _product(factors, n).terms)
        return PauliSum(n, data).simplify()


class BravyiKitaevMapper(_LadderMapper):
    """Bravyi-Kitaev encoding; qubit ``j`` stores the Fenwick partial sum ending at mode ``j``."""

    kind = "fermionic"

    def num_qubits(self, n_modes: int) -> int:
        return n_modes

    def ladder(self, kind: str, mode: int, n_modes: int) -> PauliSum:
        return _bk_ladder(kind, mode, n_modes)


def bk_encoding_matrix(n_modes: int) -> list[list[int]]:
    """Binary matrix ``beta`` with ``b_i = Σ_j beta[i][j] n_j (mod 2)``."""
    beta = [[0] * n_modes for _ in range(n_modes)]
    for i in range(n_modes):
        lowbit = (i + 1) & -(i + 1)
        for j in range(i - lowbit + 1, i + 1):
            beta[i][j] = 1
    return beta


def _gf2_inverse(mat: list[list[int]]) -> list[list[int]]:
    n = len(mat)
    aug = [row[:] + [int(i == j) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(n):
            if r != col and aug[r][col]:
                aug[r] = [a ^ b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@lru_cache(maxsize=None)
def bk_sets(n_modes: int) -> tuple[tuple[frozenset, ...], ...]:
    """Update, parity, flip and remainder sets for every mode."""
    beta = bk_encoding_matrix(n_modes)
    inv = _gf2_inverse(beta)
    update, parity, flip, remainder = [], [], [], []
    for j in range(n_modes):
        update.append(frozenset(i for i in range(n_modes) if i != j and beta[i][j]))
        par = [0] * n_modes
        for k in range(j):
            par = [a ^ b for a, b in zip(par, inv[k])]
        p_set = frozenset(i for i in range(n_modes) if par[i])
        f_set = frozenset(i for i in range(n_modes) if i != j and inv[j][i])
        parity.append(p_set)
        flip.append(f_set)
        remainder.append(p_set - f_set)
    return tuple(update), tuple(parity), tuple(flip), tuple(remainder)


@lru_cache(maxsize=None)
def _bk_ladder(kind: str, mode: int, n_modes: int) -> PauliSum:
    update, parity, _, remainder = bk_sets(n_modes)

    def label(center: str, z_set) -> str:
        letters = ["I"] * n_modes
        for q in update[mode]:
            letters[q] = "X"
        for q in z_set:
            letters[q] = "Z"
        letters[mode] = center
        return "".join(reversed(letters))

    sign = -1 if kind == CREATE else 1
    # a†_j = (X_U X_j Z_P - i X_U Y_j Z_R) / 2
    return PauliSum(
        n_modes,
        [(0.5, label("X", parity[mode])), (sign * 0.5j, label("Y", remainder[mode]))],
    )


class BosonicLinearMapper(_LadderMapper):
    """Unary encoding: mode ``k`` uses ``n_max + 1`` qubits, level ``n`` = flag on qubit ``n``."""

    kind = "bosonic"

    def __init__(self, n_max: int = 1):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = n_max

    def num_qubits(self, n_modes: int) -> int:
        return n_modes * (self.n_max + 1)

    def ladder(self, kind: str, mode: int, n_modes: int) -> PauliSum:
        return _linear_ladder(kind, mode, n_modes, self.n_max)

    def __repr__(self):
        return f"BosonicLinearMapper(n_max={self.n_max})"


@lru_cache(maxsize=None)
def _linear_ladder(kind: str, mode: int, n_modes: int, n_max: int) -> PauliSum:
    n = n_modes * (n_max + 1)
    base = mode * (n_max + 1)
    data = []
    for level in range(n_max):
        lo, hi = base + level, base + level + 1
        if kind == CREATE:
            pair = _sigma_plus(n, lo) @ _sigma_minus(n, hi)
        else:
            pair = _sigma_minus(n, lo) @ _sigma_plus(n, hi)
        data.extend((math.sqrt(level + 1) * c, s) for c, s in pair.terms)
    return PauliSum(n, data).simplify()


class BosonicLogarithmicMapper(_LadderMapper):
    """Binary encoding over ``ceil(log2(n_max + 1))`` qubits per mode.

    The ladder operators act on the full ``2^q`` level space of the register,
    so ``b†`` annihilates only the top binary state.
    """

    kind = "bosonic"

    def __init__(self, n_max: int = 1):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = n_max

    @property
    def qubits_per_mode(self) -> int:
        return max(1, math.ceil(math.log2(self.n_max + 1)))

    def num_qubits(self, n_modes: int) -> int:
        return n_modes * self.qubits_per_mode

    def ladder(self, kind: str, mode: int, n_modes: int) -> PauliSum:
        return _log_ladder(kind, mode, n_modes, self.qubits_per_mode)

    def __repr__(self):
        return f"BosonicLogarithmicMapper(n_max={self.n_max})"


def _outer(n: int, base: int, width: int, ket: int, bra: int) -> PauliSum:
    ops = []
    for k in range(width):
        a, b = (ket >> k) & 1, (bra >> k) & 1
        q = base + k
        if a == b:
            sign = 1 if a == 0 else -1
            ops.append(PauliSum(n, [(0.5, _one(n, q, "I")), (0.5 * sign, _one(n, q, "Z"))]))
        elif a == 0:
            ops.append(_sigma_plus(n, q))
        else:
            ops.append(_sigma_minus(n, q))
    return _product(ops, n)


@lru_cache(maxsize=None)
def _log_ladder(kind: str, mode: int, n_modes: int, width: int) -> PauliSum:
    n = n_modes * width
    base = mode * width
    data = []
    for level in range((1 << width) - 1):
        amp = math.sqrt(level + 1)
        if kind == CREATE:
            outer = _outer(n, base, width, level + 1, level)
        else:
            outer = _outer(n, base, width, level, level + 1)
        data.extend((amp * c, s) for c, s in outer.terms)
    return PauliSum(n, data).simplify()


@dataclass(frozen=True)
class RegisterSlot:
    key: str
    kind: str
    n_modes: int
    n_qubits: int
    offset: int


@dataclass(frozen=True)
class RegisterLayout:
    slots: tuple[RegisterSlot, ...]

    @property
    def total_qubits(self) -> int:
        return sum(s.n_qubits for s in self.slots)

    def slot(self, key: str) -> RegisterSlot:
        for s in self.slots:
            if s.key == key:
                return s
        raise KeyError(key)

    def qubits(self, key: str) -> range:
        s = self.slot(key)
        return range(s.offset, s.offset + s.n_qubits)

    def register_of(self, qubit: int) -> int:
        """Index (in registry order) of the register holding ``qubit``."""
        for i, s in enumerate(self.slots):
            if s.offset <= qubit < s.offset + s.n_qubits:
                return i
        raise IndexError(qubit)

    def display_order(self) -> str:
        """Register keys from most to least significant qubit, e.g. ``"B1 F1 F0"``."""
        names = []
        for s in reversed(self.slots):
            per = s.n_qubits // s.n_modes
            for mode in reversed(range(s.n_modes)):
                for k in reversed(range(per)):
                    names.append(f"{s.key}{mode}" if per == 1 else f"{s.key}{mode}.{k}")
        return " ".join(names)


def _resolve(mappers: Mapping, key: str, kind: str):
    mapper = mappers.get(key, mappers.get(kind))
    if mapper is None:
        raise MapperError(f"no mapper supplied for register {key!r}")
    if mapper.kind != kind:
        raise MapperError(f"register {key!r} is {kind} but mapper handles {mapper.kind}")
    return mapper


def register_layout(op_or_registry, mappers: Mapping) -> RegisterLayout:
    registry = op_or_registry.registry if isinstance(op_or_registry, MixedOp) else op_or_registry
    slots = []
    offset = 0
    for reg in registry:
        width = _resolve(mappers, reg.key, reg.kind).num_qubits(reg.n_modes)
        slots.append(RegisterSlot(reg.key, reg.kind, reg.n_modes, width, offset))
        offset += width
    return RegisterLayout(tuple(slots))


def map_fermionic_bk(op: FermionicOp) -> PauliSum:
    return BravyiKitaevMapper().map(op)


def map_bosonic_linear(op: BosonicOp, n_max: int) -> PauliSum:
    return BosonicLinearMapper(n_max).map(op)


def map_bosonic_log(op: BosonicOp, n_max: int) -> PauliSum:
    return BosonicLogarithmicMapper(n_max).map(op)


def map_mixed(op: MixedOp, mappers: Mapping) -> PauliSum:
    """Map a mixed operator.

    ``mappers`` is keyed by register key; a kind name (``"fermionic"``,
    ``"bosonic"``) may be used as a fallback for all registers of that kind.
    """
    layout = register_layout(op, mappers)
    total = layout.total_qubits
    cache: dict = {}
    data = []
    for term in op.terms:
        acc = [(0, 0, complex(term.coefficient))]
        for key, factor in term.factors:
            ck = (key, factor)
            if ck not in cache:
                slot = layout.slot(key)
                mapped = _resolve(mappers, key, slot.kind).map(factor)
                cache[ck] = mapped.embed(total, slot.offset).raw_terms()
            # registers are disjoint: no phases, just OR the bit planes together
            acc = [(x1 | x2, z1 | z2, c1 * c2) for x1, z1, c1 in acc for x2, z2, c2 in cache[ck]]
        data.extend(acc)
    return PauliSum._raw(total, data).simplify()
