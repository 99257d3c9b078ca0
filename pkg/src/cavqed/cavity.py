"""Cavity-QED Hamiltonians for a two-level emitter in a planar cavity.

Two formulations are built as :class:`~cavqed.operators.MixedOp` objects:

* standing waves - one bosonic register per cavity mode that couples to the
  emitter, star-shaped light-matter coupling;
* localized basis - photon operators re-expanded over orthonormal triangular
  functions, giving nearest-neighbour hopping ``tau`` and a local coupling
  vector ``sigma`` that can be truncated to fit sparse hardware.

Atomic units throughout. The fermionic register holds the ground level in
mode 0 and the excited level in mode 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO

import numpy as np
from scipy.integrate import simpson

from .mappers import (
    BosonicLinearMapper,
    BosonicLogarithmicMapper,
    BravyiKitaevMapper,
    RegisterLayout,
    map_mixed,
    register_layout,
)
from .operators import BosonicOp, FermionicOp, MixedOp, Register, compose_mixed
from .pauli import PauliSum

SPEED_OF_LIGHT = 137.035999084
MATTER_KEY = "matter"
GROUND, EXCITED = 0, 1


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class MatterLevels:
    energies: tuple[float, float] = (-0.6738, -0.2798)
    dipole: float = 60.0

    def __post_init__(self):
        if len(self.energies) != 2:
            raise ConfigurationError("only two-level emitters are supported")
        if self.energies[EXCITED] <= self.energies[GROUND]:
            raise ConfigurationError("excited level must lie above the ground level")

    @property
    def transition_energy(self) -> float:
        return self.energies[EXCITED] - self.energies[GROUND]

    def omega(self, i: int, j: int) -> float:
        return abs(self.energies[j] - self.energies[i])

    def dipole_element(self, i: int, j: int) -> float:
        return 0.0 if i == j else self.dipole


@dataclass(frozen=True)
class CavityConfig:
    length: float = 13000.0
    n_modes: int = 24
    z0: float | None = None
    c: float = SPEED_OF_LIGHT
    n_max: int = 1
    rwa: bool = True
    boson_mapper: str = "log"

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigurationError("cavity length must be positive")
        if self.n_modes < 1:
            raise ConfigurationError("need at least one cavity mode")
        if not 0 < self.position < self.length:
            raise ConfigurationError("emitter must sit strictly inside the cavity")
        if self.boson_mapper not in ("log", "linear"):
            raise ConfigurationError(f"unknown bosonic mapper {self.boson_mapper!r}")

    @property
    def position(self) -> float:
        return self.length / 2 if self.z0 is None else self.z0

    def bosonic_mapper(self):
        if self.boson_mapper == "log":
            return BosonicLogarithmicMapper(self.n_max)
        return BosonicLinearMapper(self.n_max)


@dataclass(frozen=True)
class LocalizedBasisConfig:
    n_loc: int = 13
    sigma_support: int | None = 1
    tau_bandwidth: int | None = 1
    points_per_support: int = 1025
    projection: str = "plane_wave"

    def __post_init__(self):
        if self.n_loc < 1 or self.n_loc % 2 == 0:
            raise ConfigurationError(
                f"n_loc must be odd (got {self.n_loc}); an even count leaves two equal "
                "central couplings and forces SWAPs"
            )
        s = self.sigma_support
        if s is not None and (s < 1 or s % 2 == 0 or s > self.n_loc):
            raise ConfigurationError("sigma_support must be odd and at most n_loc")
        if self.tau_bandwidth is not None and self.tau_bandwidth < 0:
            raise ConfigurationError("tau_bandwidth must be non-negative")
        if self.points_per_support < 513:
            raise ConfigurationError("use at least 513 quadrature points per support")
        if self.projection not in ("plane_wave", "sine"):
            raise ConfigurationError(f"unknown projection {self.projection!r}")


def mode_wavevector(alpha: int, config: CavityConfig) -> float:
    return math.pi * alpha / config.length


def mode_frequency(alpha: int, config: CavityConfig) -> float:
    """Ω_α = c q_α with q_α = π α / L."""
    if alpha < 1:
        raise ValueError("mode index starts at 1")
    return config.c * mode_wavevector(alpha, config)


def mode_function(alpha: int, z, config: CavityConfig):
    """Standing-wave amplitude sqrt(2/L) sin(q_α z)."""
    return math.sqrt(2.0 / config.length) * np.sin(mode_wavevector(alpha, config) * np.asarray(z))


def coupled_modes(config: CavityConfig, tol: float = 1e-12) -> list[int]:
    """Modes with a non-vanishing amplitude at the emitter position."""
    scale = math.sqrt(2.0 / config.length)
    return [
        a for a in range(1, config.n_modes + 1)
        if abs(mode_function(a, config.position, config)) > tol * scale
    ]


def zero_point_energy(config: CavityConfig) -> float:
    return sum(mode_frequency(a, config) / 2 for a in range(1, config.n_modes + 1))


@dataclass
class CavityHamiltonian:
    """A built Hamiltonian plus everything needed to map, compile and check it.

    ``photon_block`` and ``coupling`` describe the single-excitation sector
    directly in terms of the physical parameters, independently of the qubit
    mapping, and feed the exact reference solver.
    """

    approach: str
    op: MixedOp
    mappers: dict
    layout: RegisterLayout
    matter: MatterLevels
    offset: float
    photon_block: np.ndarray
    coupling: np.ndarray
    photon_keys: tuple[str, ...]
    rwa: bool
    n_max: int
    basis_data: LocalizedBasisData | None = None
    labels: tuple = field(default_factory=tuple)

    @cached_property
    def pauli(self) -> PauliSum:
        return map_mixed(self.op, self.mappers)

    @property
    def n_qubits(self) -> int:
        return self.layout.total_qubits

    @property
    def matter_qubits(self) -> tuple[int, ...]:
        return tuple(self.layout.qubits(MATTER_KEY))

    def _matter_op(self, fop: FermionicOp) -> PauliSum:
        registry = self.op.registry
        return map_mixed(compose_mixed(registry, [(MATTER_KEY, fop)]), self.mappers)

    def level_population(self, level: int = EXCITED) -> PauliSum:
        """Mapped ``c†_i c_i`` on the full register."""
        return self._matter_op(FermionicOp.number(level, 2))

    def excitation_number(self) -> PauliSum:
        """``n_e + Σ_k a†_k a_k``; conserved under the rotating-wave approximation."""
        total = self.level_population(EXCITED)
        for key in self.photon_keys:
            term = compose_mixed(self.op.registry, [(key, BosonicOp.number(0, 1))])
            total = total + map_mixed(term, self.mappers)
        return total

    def photon_number(self, key: str) -> PauliSum:
        term = compose_mixed(self.op.registry, [(key, BosonicOp.number(0, 1))])
        return map_mixed(term, self.mappers)

    def subspace_hamiltonian(self) -> np.ndarray:
        """Single-excitation matrix in the basis ``{|e,vac>, |g,1_k>}``."""
        n = len(self.photon_keys)
        h = np.zeros((n + 1, n + 1), dtype=complex)
        e_g, e_e = self.matter.energies
        h[0, 0] = e_e
        h[1:, 1:] = self.photon_block + e_g * np.eye(n)
        h[0, 1:] = self.coupling
        h[1:, 0] = np.conj(self.coupling)
        return h


def _registry(n_photon_registers: int, keys: list[str]) -> list[Register]:
    regs = [Register(MATTER_KEY, "fermionic", 2)]
    regs.extend(Register(k, "bosonic", 1) for k in keys[:n_photon_registers])
    return regs


def _mappers(config: CavityConfig) -> dict:
    return {"fermionic": BravyiKitaevMapper(), "bosonic": config.bosonic_mapper()}


_RAISE = FermionicOp(2, [(1.0, "+_1 -_0")])  # c†_e c_g
_LOWER = FermionicOp(2, [(1.0, "+_0 -_1")])  # c†_g c_e
_CREATE = BosonicOp(1, [(1.0, "+_0")])
_DESTROY = BosonicOp(1, [(1.0, "-_0")])


def _interaction(registry, key: str, amplitude: complex, rwa: bool) -> MixedOp:
    """``amplitude c†_e c_g b + conj(amplitude) c†_g c_e b†`` (+ counter-rotating terms)."""
    parts = [
        compose_mixed(registry, [(MATTER_KEY, _RAISE), (key, _DESTROY)], amplitude),
        compose_mixed(registry, [(MATTER_KEY, _LOWER), (key, _CREATE)], np.conj(amplitude)),
    ]
    if not rwa:
        parts += [
            compose_mixed(registry, [(MATTER_KEY, _RAISE), (key, _CREATE)], np.conj(amplitude)),
            compose_mixed(registry, [(MATTER_KEY, _LOWER), (key, _DESTROY)], amplitude),
        ]
    op = parts[0]
    for p in parts[1:]:
        op = op + p
    return op


def _matter_terms(registry, matter: MatterLevels) -> MixedOp:
    op = None
    for level, energy in enumerate(matter.energies):
        term = compose_mixed(registry, [(MATTER_KEY, FermionicOp.number(level, 2))], energy)
        op = term if op is None else op + term
    return op


def build_standing_waves(matter: MatterLevels, config: CavityConfig) -> CavityHamiltonian:
    modes = coupled_modes(config)
    keys = [f"mode{a}" for a in modes]
    registry = _registry(len(keys), keys)
    d_omega = matter.dipole_element(EXCITED, GROUND) * matter.omega(GROUND, EXCITED)

    op = _matter_terms(registry, matter)
    omegas = np.array([mode_frequency(a, config) for a in modes])
    for key, w in zip(keys, omegas):
        op = op + compose_mixed(registry, [(key, BosonicOp.number(0, 1))], w)
    couplings = []
    for a, key, w in zip(modes, keys, omegas):
        g = -d_omega * float(mode_function(a, config.position, config)) * math.sqrt(1 / (2 * w))
        couplings.append(g)
        op = op + _interaction(registry, key, g, config.rwa)

    mappers = _mappers(config)
    return CavityHamiltonian(
        approach="standing_waves",
        op=op,
        mappers=mappers,
        layout=register_layout(op, mappers),
        matter=matter,
        offset=zero_point_energy(config),
        photon_block=np.diag(omegas).astype(complex),
        coupling=np.array(couplings, dtype=complex),
        photon_keys=tuple(keys),
        rwa=config.rwa,
        n_max=config.n_max,
        labels=tuple(modes),
    )


@dataclass(frozen=True)
class TriangularBasis:
    """Disjoint unit-area-normalized triangles tiling ``[0, L]``."""

    centers: np.ndarray
    half_width: float
    length: float

    @property
    def n_loc(self) -> int:
        return len(self.centers)

    @property
    def slope(self) -> float:
        return 1.0 / self.half_width

    @property
    def norm(self) -> float:
        # ∫ (1 - m|u|)^2 du over the support = 2 / (3m)
        return math.sqrt(1.5 * self.slope)

    def evaluate(self, l: int, z) -> np.ndarray:
        u = np.abs(np.asarray(z, dtype=float) - self.centers[l]) * self.slope
        return self.norm * np.clip(1.0 - u, 0.0, None)

    def support(self, l: int) -> tuple[float, float]:
        return self.centers[l] - self.half_width, self.centers[l] + self.half_width


def triangular_basis(loc: LocalizedBasisConfig, config: CavityConfig) -> TriangularBasis:
    n = loc.n_loc
    half = config.length / (2 * n)
    centers = (2 * np.arange(n) + 1) * half
    return TriangularBasis(centers=centers, half_width=half, length=config.length)


def projections(basis: TriangularBasis, config: CavityConfig, n_points: int = 1025,
                projection: str = "plane_wave") -> np.ndarray:
    """``P[l, α-1] = ∫ L_l(z) u_α(z) dz`` by composite Simpson over each support.

    ``u_α`` is the normalized plane wave ``exp(i q_α z) / sqrt(L)`` by default,
    or the standing wave ``sqrt(2/L) sin(q_α z)`` for ``projection="sine"``.
    """
    if n_points % 2 == 0:
        n_points += 1
    q = np.array([mode_wavevector(a, config) for a in range(1, config.n_modes + 1)])
    out = np.zeros((basis.n_loc, config.n_modes), dtype=complex)
    for l in range(basis.n_loc):
        lo, hi = basis.support(l)
        z = np.linspace(lo, hi, n_points)
        weight = basis.evaluate(l, z)
        if projection == "plane_wave":
            waves = np.exp(1j * np.outer(q, z)) / math.sqrt(config.length)
        else:
            waves = math.sqrt(2.0 / config.length) * np.sin(np.outer(q, z))
        out[l] = simpson(weight * waves, x=z, axis=1)
    return out


@dataclass
class LocalizedBasisData:
    P: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray
    tau_full: np.ndarray
    sigma_full: np.ndarray
    zero_point_energy: float

    @property
    def center(self) -> int:
        return (len(self.sigma) - 1) // 2

    def sigma_ratio(self) -> float:
        """``|σ_neighbour| / |σ_central|`` of the untruncated coupling vector."""
        c = self.center
        if len(self.sigma_full) < 3:
            return 0.0
        neighbour = max(abs(self.sigma_full[c - 1]), abs(self.sigma_full[c + 1]))
        return neighbour / abs(self.sigma_full[c])

    def dump(self, stream: IO[str]) -> None:
        """Plain-text dump: one block per quantity, row-major, ``%.12e`` fields."""
        stream.write(f"# zero_point_energy {self.zero_point_energy:.12e}\n")
        for name, mat in (("P", self.P), ("tau", self.tau), ("sigma", self.sigma[None, :])):
            stream.write(f"# {name} {mat.shape[0]} {mat.shape[1]} (re im pairs)\n")
            for row in mat:
                stream.write(" ".join(f"{v.real:.12e} {v.imag:.12e}" for v in row) + "\n")


def localized_basis_data(matter: MatterLevels, config: CavityConfig,
                         loc: LocalizedBasisConfig) -> LocalizedBasisData:
    basis = triangular_basis(loc, config)
    P = projections(basis, config, loc.points_per_support, loc.projection)
    alphas = np.arange(1, config.n_modes + 1)
    omegas = np.array([mode_frequency(a, config) for a in alphas])
    lam = np.array([float(mode_function(a, config.position, config)) for a in alphas])
    tau_full = P.conj() @ np.diag(omegas) @ P.T
    sigma_full = P @ (lam * np.sqrt(1 / (2 * omegas)))

    n = loc.n_loc
    tau = tau_full.copy()
    if loc.tau_bandwidth is not None:
        ll = np.arange(n)
        tau[np.abs(ll[:, None] - ll[None, :]) > loc.tau_bandwidth] = 0
    sigma = sigma_full.copy()
    if loc.sigma_support is not None:
        c, half = (n - 1) // 2, loc.sigma_support // 2
        keep = np.zeros(n, dtype=bool)
        keep[c - half:c + half + 1] = True
        sigma[~keep] = 0
    return LocalizedBasisData(P, tau, sigma, tau_full, sigma_full, zero_point_energy(config))


def build_localized(matter: MatterLevels, config: CavityConfig,
                    loc: LocalizedBasisConfig) -> CavityHamiltonian:
    data = localized_basis_data(matter, config, loc)
    n = loc.n_loc
    keys = [f"loc{l}" for l in range(n)]
    registry = _registry(n, keys)
    d_omega = matter.dipole_element(EXCITED, GROUND) * matter.omega(GROUND, EXCITED)

    op = _matter_terms(registry, matter)
    for l in range(n):
        op = op + compose_mixed(registry, [(keys[l], BosonicOp.number(0, 1))], data.tau[l, l].real)
    for l in range(n):
        for lp in range(l + 1, n):
            t = data.tau[l, lp]
            if t == 0:
                continue
            # τ_{ll'} t†_l t_l' + τ_{l'l} t†_l' t_l
            op = op + compose_mixed(registry, [(keys[l], _CREATE), (keys[lp], _DESTROY)], t)
            op = op + compose_mixed(registry, [(keys[lp], _CREATE), (keys[l], _DESTROY)], np.conj(t))
    coupling = -d_omega * data.sigma
    for l in range(n):
        if data.sigma[l] != 0:
            op = op + _interaction(registry, keys[l], coupling[l], config.rwa)

    mappers = _mappers(config)
    return CavityHamiltonian(
        approach="localized",
        op=op,
        mappers=mappers,
        layout=register_layout(op, mappers),
        matter=matter,
        offset=data.zero_point_energy,
        photon_block=data.tau.copy(),
        coupling=coupling.astype(complex),
        photon_keys=tuple(keys),
        rwa=config.rwa,
        n_max=config.n_max,
        basis_data=data,
        labels=tuple(range(n)),
    )
