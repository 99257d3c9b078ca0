"""Sparse algebra over complex-weighted sums of n-qubit Pauli strings.

A Pauli string is packed into two integer bit planes, ``x`` and ``z``. Bit ``q``
of each plane describes qubit ``q`` (qubit 0 is the least significant one):

    (x, z) = (0, 0) -> I,  (1, 0) -> X,  (1, 1) -> Y,  (0, 1) -> Z

so that the operator is ``i^{|x & z|} X^x Z^z``. Text labels are written with the
most significant qubit on the left, e.g. ``"ZZI"`` acts with Z on qubits 2 and 1.
"""
from __future__ import annotations

from numbers import Number
from typing import Iterable

import numpy as np

DROP_TOL = 1e-12
ORACLE_MAX_QUBITS = 12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


class QubitCountError(ValueError):
    """Operands act on registers of different width."""


class OracleSizeError(ValueError):
    """Dense realization requested above the oracle qubit cap."""


class PauliString:
    """A single Pauli string in bit-plane form (no phase)."""

    __slots__ = ("n_qubits", "x", "z")

    def __init__(self, n_qubits: int, x: int = 0, z: int = 0):
        mask = (1 << n_qubits) - 1
        if x & ~mask or z & ~mask:
            raise ValueError(f"bit planes exceed {n_qubits} qubits")
        self.n_qubits = n_qubits
        self.x = x
        self.z = z

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        n = len(label)
        x = z = 0
        for pos, letter in enumerate(reversed(label.upper())):
            try:
                xb, zb = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r} in {label!r}") from None
            x |= xb << pos
            z |= zb << pos
        return cls(n, x, z)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_LETTER[(self.x >> q) & 1, (self.z >> q) & 1]
            for q in reversed(range(self.n_qubits))
        )

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[(self.x >> qubit) & 1, (self.z >> qubit) & 1]

    @property
    def support(self) -> tuple[int, ...]:
        bits = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (bits >> q) & 1)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return not (self.x | self.z)

    def compose(self, other: PauliString) -> tuple[complex, PauliString]:
        """Return ``(phase, string)`` with ``self @ other == phase * string``."""
        if self.n_qubits != other.n_qubits:
            raise QubitCountError(f"{self.n_qubits} vs {other.n_qubits} qubits")
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        k = (
            (self.x & self.z).bit_count()
            + (other.x & other.z).bit_count()
            + 2 * (self.z & other.x).bit_count()
            - (x3 & z3).bit_count()
        )
        return _I_POWERS[k % 4], PauliString(self.n_qubits, x3, z3)

    def commutes(self, other: PauliString) -> bool:
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Permutation and phases such that ``(P v)[j] = phases[j] * v[perm[j]]``."""
        idx = np.arange(1 << self.n_qubits, dtype=np.int64)
        perm = idx ^ self.x
        sign = 1 - 2 * (np.bitwise_count(perm & self.z) & 1).astype(np.int8)
        phase = _I_POWERS[(self.x & self.z).bit_count() % 4]
        return perm, phase * sign

    def apply(self, vec: np.ndarray) -> np.ndarray:
        perm, phases = self.action()
        return phases * vec[perm]

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n_qubits, self.x, self.z) == (other.n_qubits, other.x, other.z)

    def __hash__(self):
        return hash((self.n_qubits, self.x, self.z))

    def __repr__(self):
        return f"PauliString({self.label!r})"


class PauliSum:
    """Complex-weighted sum of Pauli strings on a fixed number of qubits.

    Instances are treated as immutable; every operation returns a new sum.
    Products, sums and tensor products come back simplified.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Iterable = ()):
        self.n_qubits = n_qubits
        data = []
        for coef, string in terms:
            if isinstance(string, str):
                string = PauliString.from_label(string)
            if string.n_qubits != n_qubits:
                raise QubitCountError(
                    f"string {string.label} has {string.n_qubits} qubits, expected {n_qubits}"
                )
            data.append((string.x, string.z, complex(coef)))
        self._terms = tuple(data)

    @classmethod
    def from_list(cls, pairs: Iterable[tuple[str, complex]], n_qubits: int | None = None):
        """Build from ``[("ZZI", 0.5), ...]`` pairs (label first, as in debug dumps)."""
        pairs = list(pairs)
        if n_qubits is None:
            if not pairs:
                raise ValueError("n_qubits is required for an empty list")
            n_qubits = len(pairs[0][0])
        return cls(n_qubits, [(coef, label) for label, coef in pairs])

    @classmethod
    def identity(cls, n_qubits: int, coef: complex = 1.0) -> PauliSum:
        return cls._raw(n_qubits, [(0, 0, complex(coef))])

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str, coef: complex = 1.0) -> PauliSum:
        xb, zb = _LETTER_BITS[letter]
        return cls._raw(n_qubits, [(xb << qubit, zb << qubit, complex(coef))])

    @classmethod
    def _raw(cls, n_qubits: int, data) -> PauliSum:
        obj = cls.__new__(cls)
        obj.n_qubits = n_qubits
        obj._terms = tuple(data)
        return obj

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return [(c, PauliString(self.n_qubits, x, z)) for x, z, c in self._terms]

    def raw_terms(self) -> tuple[tuple[int, int, complex], ...]:
        """Terms as ``(x, z, coef)`` triples; cheap, used by compilers and kernels."""
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms)

    def simplify(self, tol: float = DROP_TOL) -> PauliSum:
        if tol < 0:
            raise ValueError("tol must be non-negative")
        merged: dict[tuple[int, int], complex] = {}
        for x, z, c in self._terms:
            merged[x, z] = merged.get((x, z), 0j) + c
        return PauliSum._raw(
            self.n_qubits, [(x, z, c) for (x, z), c in merged.items() if abs(c) > tol]
        )

    def _check(self, other: PauliSum):
        if self.n_qubits != other.n_qubits:
            raise QubitCountError(f"{self.n_qubits} vs {other.n_qubits} qubits")

    def __add__(self, other):
        if isinstance(other, Number):
            other = PauliSum.identity(self.n_qubits, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum._raw(self.n_qubits, self._terms + other._terms).simplify()

    __radd__ = __add__

    def __neg__(self):
        return PauliSum._raw(self.n_qubits, [(x, z, -c) for x, z, c in self._terms])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        scalar = complex(scalar)
        return PauliSum._raw(self.n_qubits, [(x, z, c * scalar) for x, z, c in self._terms])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return mul(self, other)

    def __xor__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return tensor(self, other)

    def adjoint(self) -> PauliSum:
        return PauliSum._raw(
            self.n_qubits, [(x, z, c.conjugate()) for x, z, c in self._terms]
        )

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        for _, _, c in self.simplify()._terms:
            if abs(c.imag) > tol:
                return False
        return True

    def equiv(self, other: PauliSum, tol: float = 1e-10) -> bool:
        """Term-wise equality up to ``tol`` after simplification."""
        diff = (self - other).simplify(tol)
        return len(diff) == 0

    def embed(self, n_total: int, offset: int) -> PauliSum:
        """Place this sum on qubits ``offset .. offset + n_qubits - 1`` of a wider register."""
        if offset < 0 or offset + self.n_qubits > n_total:
            raise QubitCountError("embedding does not fit the target register")
        return PauliSum._raw(
            n_total, [(x << offset, z << offset, c) for x, z, c in self._terms]
        )

    def support(self) -> tuple[int, ...]:
        bits = 0
        for x, z, _ in self._terms:
            bits |= x | z
        return tuple(q for q in range(self.n_qubits) if (bits >> q) & 1)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec, dtype=complex)
        for c, string in self.terms:
            perm, phases = string.action()
            out += c * phases * vec[perm]
        return out

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    def __str__(self):
        if not self._terms:
            return f"0 (on {self.n_qubits} qubits)"
        return "\n".join(f"{_fmt_coef(c)} * {s.label}" for c, s in self.terms)

    def __repr__(self):
        body = ", ".join(f"({s.label!r}, {_fmt_coef(c)})" for c, s in self.terms)
        return f"PauliSum.from_list([{body}], n_qubits={self.n_qubits})"


def _fmt_coef(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.12g}"
    if c.real == 0:
        return f"{c.imag:.12g}j"
    return f"({c.real:.12g}{c.imag:+.12g}j)"


def mul(a: PauliSum, b: PauliSum) -> PauliSum:
    """Operator product ``a @ b``, simplified."""
    if a.n_qubits != b.n_qubits:
        raise QubitCountError(f"{a.n_qubits} vs {b.n_qubits} qubits")
    n = a.n_qubits
    out: dict[tuple[int, int], complex] = {}
    for x1, z1, c1 in a.raw_terms():
        s1 = (x1 & z1).bit_count()
        for x2, z2, c2 in b.raw_terms():
            x3 = x1 ^ x2
            z3 = z1 ^ z2
            k = s1 + (x2 & z2).bit_count() + 2 * (z1 & x2).bit_count() - (x3 & z3).bit_count()
            out[x3, z3] = out.get((x3, z3), 0j) + _I_POWERS[k % 4] * c1 * c2
    return PauliSum._raw(n, [(x, z, c) for (x, z), c in out.items() if abs(c) > DROP_TOL])


def tensor(a: PauliSum, b: PauliSum) -> PauliSum:
    """``a ⊗ b`` with ``b`` on the less significant qubits."""
    shift = b.n_qubits
    data = [
        ((xa << shift) | xb, (za << shift) | zb, ca * cb)
        for xa, za, ca in a.raw_terms()
        for xb, zb, cb in b.raw_terms()
    ]
    return PauliSum._raw(a.n_qubits + b.n_qubits, data).simplify()


def simplify(a: PauliSum, tol: float = DROP_TOL) -> PauliSum:
    return a.simplify(tol)


def to_matrix(a: PauliSum, max_qubits: int = ORACLE_MAX_QUBITS) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix, little-endian (basis index bit q = qubit q)."""
    n = a.n_qubits
    if n > max_qubits:
        raise OracleSizeError(f"{n} qubits exceeds the dense oracle limit of {max_qubits}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.int64)
    for c, string in a.terms:
        perm, phases = string.action()
        # (P v)[j] = phases[j] v[perm[j]]  =>  M[j, perm[j]] = phases[j]
        mat[cols, perm] += c * phases
    return mat
