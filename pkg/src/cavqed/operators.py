"""Second-quantized fermionic, bosonic and mixed operators.

Terms are kept exactly as written (no normal ordering); only the qubit mappers
interpret them. An action sequence is read left to right, so ``c†_i c_j`` is
``(("+", i), ("-", j))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

CREATE = "+"
ANNIHILATE = "-"

Action = tuple[str, int]


class ModeCountError(ValueError):
    """Operands were built for different numbers of modes."""


class RegistryError(ValueError):
    """A mixed-operator factor does not match the register registry."""


def parse_label(label: str) -> tuple[Action, ...]:
    """Parse ``"+_0 -_1"`` into ``(("+", 0), ("-", 1))``. Empty label is the identity."""
    actions = []
    for token in label.split():
        kind, _, index = token.partition("_")
        if kind not in (CREATE, ANNIHILATE) or not index.isdigit():
            raise ValueError(f"bad ladder token {token!r}")
        actions.append((kind, int(index)))
    return tuple(actions)


def format_actions(actions: Sequence[Action]) -> str:
    return " ".join(f"{kind}_{mode}" for kind, mode in actions)


@dataclass(frozen=True)
class LadderTerm:
    coefficient: complex
    actions: tuple[Action, ...]

    def adjoint(self) -> LadderTerm:
        flipped = tuple(
            (ANNIHILATE if kind == CREATE else CREATE, mode) for kind, mode in reversed(self.actions)
        )
        return LadderTerm(complex(self.coefficient).conjugate(), flipped)

    def __str__(self):
        return f"{self.coefficient:.12g} · {format_actions(self.actions)}".rstrip()


class LadderOp:
    """Sum of ladder terms over ``n_modes`` modes; base of fermionic and bosonic ops."""

    kind = "ladder"

    def __init__(self, n_modes: int, terms: Iterable = ()):
        if n_modes < 1:
            raise ValueError("n_modes must be positive")
        self.n_modes = n_modes
        checked = []
        for term in terms:
            if not isinstance(term, LadderTerm):
                coef, actions = term
                if isinstance(actions, str):
                    actions = parse_label(actions)
                term = LadderTerm(complex(coef), tuple(actions))
            for kind, mode in term.actions:
                if kind not in (CREATE, ANNIHILATE):
                    raise ValueError(f"unknown action kind {kind!r}")
                if not 0 <= mode < n_modes:
                    raise ValueError(f"mode {mode} out of range for {n_modes} modes")
            checked.append(term)
        self.terms: tuple[LadderTerm, ...] = tuple(checked)

    @classmethod
    def from_dict(cls, data: dict[str, complex], n_modes: int):
        return cls(n_modes, [(coef, label) for label, coef in data.items()])

    @classmethod
    def identity(cls, n_modes: int, coef: complex = 1.0):
        return cls(n_modes, [LadderTerm(complex(coef), ())])

    @classmethod
    def zero(cls, n_modes: int):
        return cls(n_modes)

    @classmethod
    def number(cls, mode: int, n_modes: int, coef: complex = 1.0):
        return cls(n_modes, [(coef, ((CREATE, mode), (ANNIHILATE, mode)))])

    def _same(self, other: LadderOp):
        if type(self) is not type(other):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if self.n_modes != other.n_modes:
            raise ModeCountError(f"{self.n_modes} vs {other.n_modes} modes")

    def adjoint(self):
        return type(self)(self.n_modes, [t.adjoint() for t in self.terms])

    def __add__(self, other):
        if not isinstance(other, LadderOp):
            return NotImplemented
        self._same(other)
        return type(self)(self.n_modes, self.terms + other.terms)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return type(self)(
                self.n_modes,
                [LadderTerm(t.coefficient * other, t.actions) for t in self.terms],
            )
        if isinstance(other, LadderOp):
            self._same(other)
            return type(self)(
                self.n_modes,
                [
                    LadderTerm(a.coefficient * b.coefficient, a.actions + b.actions)
                    for a in self.terms
                    for b in other.terms
                ],
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __matmul__(self, other):
        return self * other

    def simplify(self, tol: float = 1e-12):
        """Merge identical action sequences and drop negligible coefficients."""
        merged: dict[tuple[Action, ...], complex] = {}
        for t in self.terms:
            merged[t.actions] = merged.get(t.actions, 0j) + t.coefficient
        return type(self)(
            self.n_modes, [LadderTerm(c, a) for a, c in merged.items() if abs(c) > tol]
        )

    def canonical(self) -> tuple:
        return tuple(sorted((t.actions, t.coefficient) for t in self.simplify().terms))

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self.n_modes == other.n_modes and self.canonical() == other.canonical()

    def __hash__(self):
        return hash((type(self).__name__, self.n_modes, self.canonical()))

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return "\n".join(str(t) for t in self.terms)

    def __repr__(self):
        return f"{type(self).__name__}(n_modes={self.n_modes}, terms={len(self.terms)})"


class FermionicOp(LadderOp):
    kind = "fermionic"


class BosonicOp(LadderOp):
    kind = "bosonic"


def scale_add(*pairs: tuple[complex, LadderOp]) -> LadderOp:
    """Linear combination ``Σ s_k op_k`` (term lists concatenated, not merged)."""
    if not pairs:
        raise ValueError("need at least one (scalar, op) pair")
    result = None
    for scalar, op in pairs:
        scaled = op * scalar
        result = scaled if result is None else result + scaled
    return result


@dataclass(frozen=True)
class Register:
    key: str
    kind: str
    n_modes: int


@dataclass(frozen=True)
class MixedTerm:
    coefficient: complex
    factors: tuple[tuple[str, LadderOp], ...]

    def adjoint(self) -> MixedTerm:
        # factors live on distinct registers and commute with each other
        return MixedTerm(
            complex(self.coefficient).conjugate(),
            tuple((key, op.adjoint()) for key, op in self.factors),
        )


class MixedOp:
    """Sum of products of operators living on distinct named registers.

    The registry fixes the register order, which in turn fixes how the mapped
    qubit registers are concatenated (first entry on the least significant qubits).
    """

    def __init__(self, registry: Sequence, terms: Iterable[MixedTerm] = ()):
        regs = []
        for entry in registry:
            regs.append(entry if isinstance(entry, Register) else Register(*entry))
        keys = [r.key for r in regs]
        if len(set(keys)) != len(keys):
            raise RegistryError("duplicate register key in registry")
        self.registry: tuple[Register, ...] = tuple(regs)
        self._by_key = {r.key: r for r in regs}
        terms = tuple(terms)
        for term in terms:
            self._validate(term)
        self.terms: tuple[MixedTerm, ...] = terms

    def _validate(self, term: MixedTerm):
        seen = set()
        for key, op in term.factors:
            reg = self._by_key.get(key)
            if reg is None:
                raise RegistryError(f"unknown register key {key!r}")
            if key in seen:
                raise RegistryError(f"register {key!r} appears twice in one term")
            seen.add(key)
            if op.kind != reg.kind:
                raise RegistryError(f"register {key!r} holds {reg.kind}, got {op.kind}")
            if op.n_modes != reg.n_modes:
                raise RegistryError(f"register {key!r} has {reg.n_modes} modes, got {op.n_modes}")

    def register(self, key: str) -> Register:
        return self._by_key[key]

    def _same_registry(self, other: MixedOp):
        if self.registry != other.registry:
            raise RegistryError("mixed operators have different registries")

    def __add__(self, other):
        if not isinstance(other, MixedOp):
            return NotImplemented
        self._same_registry(other)
        return MixedOp(self.registry, self.terms + other.terms)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return MixedOp(
            self.registry,
            [MixedTerm(t.coefficient * scalar, t.factors) for t in self.terms],
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def adjoint(self) -> MixedOp:
        return MixedOp(self.registry, [t.adjoint() for t in self.terms])

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        lines = []
        for t in self.terms:
            parts = [f"{key}[{' + '.join(format_actions(x.actions) for x in op.terms)}]"
                     for key, op in t.factors]
            lines.append(f"{t.coefficient:.12g} · {' '.join(parts)}".rstrip())
        return "\n".join(lines) if lines else "0"


def compose_mixed(registry: Sequence, factors: Sequence[tuple[str, LadderOp]] = (),
                  scalar: complex = 1.0) -> MixedOp:
    """Single-term mixed operator ``scalar · Π factors``.

    Coefficients of single-term factors are pulled out into the mixed term, so
    the resulting coefficient is ``scalar`` times their product.
    """
    coef = complex(scalar)
    normalized = []
    for key, op in factors:
        if len(op.terms) == 1:
            coef *= op.terms[0].coefficient
            op = type(op)(op.n_modes, [LadderTerm(1.0, op.terms[0].actions)])
        normalized.append((key, op))
    return MixedOp(registry, [MixedTerm(coef, tuple(normalized))])
