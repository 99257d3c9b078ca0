"""Statevector, single-excitation oracle, and Monte-Carlo trajectory simulation.

Amplitudes are little-endian: bit ``q`` of the basis index is qubit ``q``.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from . import _kernels as _k
from .cavity import EXCITED, MATTER_KEY, CavityHamiltonian
from .circuits import Gate, GateCircuit, NonHermitianError, ordered_terms
from .mappers import RegisterLayout, bk_encoding_matrix
from .pauli import PauliString, PauliSum

WORKERS_ENV = "CAVQED_WORKERS"
NORM_TOL = 1e-10

_SQ2 = 1 / math.sqrt(2)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_DIAG = {"S": (1, 1j), "Sdg": (1, -1j)}


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense matrix of a gate; two-qubit matrices use ``qubits[0]`` as the high bit."""
    k = gate.kind
    if k == "H":
        return _H.copy()
    if k in _DIAG:
        return np.diag(_DIAG[k]).astype(complex)
    if k == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == "RZ":
        return np.diag([np.exp(-0.5j * gate.theta), np.exp(0.5j * gate.theta)])
    if k == "RX":
        c, s = math.cos(gate.theta / 2), math.sin(gate.theta / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if k == "CX":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if k == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise ValueError(k)


class StateVector:
    def __init__(self, n_qubits: int, data: np.ndarray | None = None):
        self.n_qubits = n_qubits
        if data is None:
            data = np.zeros(1 << n_qubits, dtype=complex)
            data[0] = 1.0
        data = np.ascontiguousarray(data, dtype=complex)
        if data.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {data.shape}")
        self.data = data

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> StateVector:
        data = np.zeros(1 << n_qubits, dtype=complex)
        data[index] = 1.0
        return cls(n_qubits, data)

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.data.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalize(self) -> StateVector:
        self.data /= self.norm()
        return self

    # kernels -----------------------------------------------------------
    def apply_1q(self, u: np.ndarray, q: int):
        _k.mat1(self.data, q, complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1]))

    def apply_h(self, q: int):
        _k.had1(self.data, q, _SQ2)

    def apply_diag(self, d0: complex, d1: complex, q: int):
        _k.diag1(self.data, q, complex(d0), complex(d1))

    def apply_x(self, q: int):
        _k.flip1(self.data, q)

    def apply_cx(self, control: int, target: int):
        _k.cx(self.data, control, target)

    def apply_swap(self, a: int, b: int):
        _k.swap(self.data, a, b)

    def apply_gate(self, gate: Gate) -> StateVector:
        k, qs = gate.kind, gate.qubits
        if k == "CX":
            self.apply_cx(*qs)
        elif k == "SWAP":
            self.apply_swap(*qs)
        elif k == "H":
            self.apply_h(qs[0])
        elif k == "X":
            self.apply_x(qs[0])
        elif k in _DIAG:
            self.apply_diag(*_DIAG[k], qs[0])
        elif k == "RZ":
            self.apply_diag(np.exp(-0.5j * gate.theta), np.exp(0.5j * gate.theta), qs[0])
        else:
            self.apply_1q(gate_matrix(gate), qs[0])
        return self

    def apply_circuit(self, circ: GateCircuit) -> StateVector:
        for g in circ.gates:
            self.apply_gate(g)
        return self

    def apply_pauli(self, string: PauliString) -> StateVector:
        self.data = string.apply(self.data)
        return self

    def apply_pauli_rotation(self, theta: float, string: PauliString) -> StateVector:
        """``exp(-i theta P)`` applied directly: cos(theta) psi - i sin(theta) P psi."""
        if string.is_identity():
            self.data *= np.exp(-1j * theta)
        else:
            self.data = math.cos(theta) * self.data - 1j * math.sin(theta) * string.apply(self.data)
        return self

    def probability_one(self, q: int) -> float:
        return float(_k.weight1(self.data, q))

    def expectation(self, obs: PauliSum, readout_error: float = 0.0) -> float:
        return expectation(self, obs, readout_error)


def _check_observable(obs: PauliSum, tol: float = NORM_TOL) -> None:
    for c, s in obs.terms:
        if abs(complex(c).imag) > tol:
            raise NonHermitianError(f"observable term {s.label} has complex coefficient {c}")


def expectation(psi: StateVector, obs: PauliSum, readout_error: float = 0.0) -> float:
    """``<psi|obs|psi>``; readout flips contract every measured qubit by ``1 - 2 e_read``."""
    if obs.n_qubits != psi.n_qubits:
        raise ValueError(f"observable has {obs.n_qubits} qubits, state has {psi.n_qubits}")
    _check_observable(obs)
    shrink = 1.0 - 2.0 * readout_error
    vec = psi.data
    total = 0.0
    for c, s in obs.terms:
        weight = s.weight
        factor = complex(c).real * shrink ** weight
        if s.is_identity():
            total += factor * float(np.vdot(vec, vec).real)
        elif s.x == 0:
            total += factor * float(_k.z_expectation(vec, s.z))
        else:
            total += factor * float(np.vdot(vec, s.apply(vec)).real)
    return total


# ---------------------------------------------------------------- evolution

def prepare_initial_state(layout: RegisterLayout, occupations: dict | None = None) -> StateVector:
    """Basis state with the emitter excited and every bosonic register in vacuum.

    ``occupations`` maps fermionic register keys to occupation lists; the
    default puts the single electron in the excited level of ``"matter"``.
    """
    if occupations is None:
        occupations = {MATTER_KEY: [0, 1]}
    index = 0
    for slot in layout.slots:
        if slot.kind != "fermionic":
            continue
        occ = occupations.get(slot.key, [0] * slot.n_modes)
        beta = bk_encoding_matrix(slot.n_modes)
        for i, row in enumerate(beta):
            bit = sum(b * n for b, n in zip(row, occ)) & 1
            index |= bit << (slot.offset + i)
    return StateVector.basis(layout.total_qubits, index)


def evolve_statevector(circ: GateCircuit, psi0: StateVector) -> list[StateVector]:
    """Snapshots at ``t = 0`` and after every Trotter step."""
    if circ.n_qubits != psi0.n_qubits:
        raise ValueError("circuit and state widths differ")
    psi = psi0.copy()
    out = [psi.copy()]
    for sl in circ.step_slices():
        for g in circ.gates[sl]:
            psi.apply_gate(g)
        out.append(psi.copy())
    return out


def evolve_product_formula(h: PauliSum, dt: float, d: int, psi0: StateVector,
                           layout: RegisterLayout | None = None) -> list[StateVector]:
    """Same product formula as :func:`~cavqed.circuits.trotterize`, by direct Pauli rotations."""
    terms = ordered_terms(h, layout)
    psi = psi0.copy()
    out = [psi.copy()]
    for _ in range(d):
        for coef, s in terms:
            psi.apply_pauli_rotation(coef * dt, s)
        out.append(psi.copy())
    return out


def circuit_unitary(circ: GateCircuit, max_qubits: int = 10) -> np.ndarray:
    if circ.n_qubits > max_qubits:
        raise ValueError(f"refusing a dense unitary above {max_qubits} qubits")
    dim = 1 << circ.n_qubits
    cols = [StateVector.basis(circ.n_qubits, j).apply_circuit(circ).data for j in range(dim)]
    return np.array(cols).T


def exact_oracle(system: CavityHamiltonian, times) -> np.ndarray:
    """``<n_e>(t)`` from the dense single-excitation Hamiltonian.

    Independent of the qubit mapping, the Trotter circuit and the simulator:
    it uses only the physical couplings stored on ``system``.
    """
    if not system.rwa:
        raise ValueError("the single-excitation oracle needs the rotating-wave approximation")
    if system.n_max != 1:
        raise ValueError("the single-excitation oracle assumes n_max = 1")
    h = system.subspace_hamiltonian()
    v0 = np.zeros(h.shape[0], dtype=complex)
    v0[0] = 1.0
    return np.array([abs((expm(-1j * h * t) @ v0)[0]) ** 2 for t in np.atleast_1d(times)])


# ---------------------------------------------------------------- noise

@dataclass(frozen=True)
class NoiseParams:
    """Gate, readout and relaxation parameters. ``t1``/``t2`` in µs, durations in ns."""

    e1: float = 0.0
    e2: float = 0.0
    e_read: float = 0.0
    t1: float = math.inf
    t2: float = math.inf
    t_1q: float = 32.0
    t_2q: float = 68.0
    eta: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        for key in ("e1", "e2", "e_read"):
            p = getattr(self, key)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{key} must be a probability, got {p}")
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.t2 > 2 * self.t1:
            raise ValueError(f"T2 = {self.t2} exceeds 2 T1 = {2 * self.t1}")
        if self.t_1q < 0 or self.t_2q < 0:
            raise ValueError("gate durations must be non-negative")

    @property
    def is_ideal(self) -> bool:
        return (self.e1 == 0 and self.e2 == 0 and self.e_read == 0
                and math.isinf(self.t1) and math.isinf(self.t2))

    def damping(self, duration_ns: float) -> float:
        """Amplitude-damping probability ``1 - exp(-t/T1)``."""
        if math.isinf(self.t1):
            return 0.0
        return -math.expm1(-duration_ns * 1e-3 / self.t1)

    def dephasing(self, duration_ns: float) -> float:
        """Phase-flip probability from the pure-dephasing time ``1/T_phi = 1/T2 - 1/(2 T1)``."""
        rate = (0.0 if math.isinf(self.t2) else 1 / self.t2) - (0.0 if math.isinf(self.t1) else 0.5 / self.t1)
        if rate <= 0:
            return 0.0
        return -0.5 * math.expm1(-duration_ns * 1e-3 * rate)


PROFILES = {
    "ideal": NoiseParams(name="ideal"),
    "pittsburgh": NoiseParams(1.80e-4, 1.52e-3, 4.33e-3, 296.33, 357.45, 32.0, 68.0, 1.0, "pittsburgh"),
    "brisbane": NoiseParams(2.49e-4, 6.76e-3, 2.05e-2, 222.44, 133.23, 60.0, 660.0, 1.0, "brisbane"),
}


def scale_noise(noise: NoiseParams, eta: float) -> NoiseParams:
    """Divide error rates by ``eta`` and stretch T1, T2 by ``eta``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if eta == 1:
        return noise
    return replace(
        noise,
        e1=noise.e1 / eta, e2=noise.e2 / eta, e_read=noise.e_read / eta,
        t1=noise.t1 * eta, t2=noise.t2 * eta, eta=noise.eta * eta,
        name=f"{noise.name}/eta={eta:g}",
    )


def noise_profile(name: str, eta: float = 1.0) -> NoiseParams:
    if name == "custom":
        return scale_noise(PROFILES["pittsburgh"], 10.0 * eta)
    if name not in PROFILES:
        raise ValueError(f"unknown noise profile {name!r}; choose from {sorted(PROFILES) + ['custom']}")
    return scale_noise(PROFILES[name], eta)


@dataclass
class TrajectoryResult:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    runs: int
    scale: str = "1"
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, header_comment: str | None = None, fmt: str = "%.10e") -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mean", "stderr", "scale"])
        for t, m, s in zip(self.times, self.mean, self.stderr):
            w.writerow([fmt % t, fmt % m, fmt % s, self.scale])
        return buf.getvalue()


_PAULI_1Q = ("X", "Y", "Z")


def _apply_letter(psi: StateVector, letter: str, q: int):
    if letter == "X":
        psi.apply_x(q)
    elif letter == "Z":
        psi.apply_diag(1, -1, q)
    elif letter == "Y":
        psi.apply_x(q)
        psi.apply_diag(-1j, 1j, q)


_DRAWS = 6  # uniforms per gate: error?, which Pauli, (damp, dephase) x 2 qubits


def _origin_count(circ: GateCircuit) -> int:
    return sum(3 if g.kind == "SWAP" else 1 for g in circ.gates if g.copy == 0)


class _Trajectory:
    """One quantum-jump realisation of a noisy circuit.

    Random numbers come from a table indexed by (original gate, fold copy), so
    a folded circuit replays the error events of its unfolded parent on the
    original gates and only draws fresh ones for the inserted copies. Every
    circuit is still sampled exactly; the fold levels merely share randomness.

    The no-jump damping branch is applied without renormalising; the squared
    norm is tracked as a scalar and folded back in at step boundaries.
    """

    def __init__(self, noise: NoiseParams, rng: np.random.Generator, n_origins: int):
        self.noise = noise
        self.table = rng.random((n_origins, 3, _DRAWS))
        self.origin = -1
        self.norm2 = 1.0
        self.relax = {
            1: (noise.damping(noise.t_1q), noise.dephasing(noise.t_1q)),
            2: (noise.damping(noise.t_2q), noise.dephasing(noise.t_2q)),
        }

    def _relax(self, psi: StateVector, q: int, gamma: float, p_phi: float, u_damp: float, u_phase: float):
        if gamma > 0:
            # decay optimistically; a jump (rare) undoes the scaling
            keep = math.sqrt(1 - gamma)
            weight = _k.decay1(psi.data, q, keep)
            if u_damp * self.norm2 < gamma * weight:
                _k.jump1(psi.data, q, 1.0 / (keep * math.sqrt(weight)))
                self.norm2 = 1.0
            else:
                self.norm2 -= gamma * weight
        if p_phi > 0 and u_phase < p_phi:
            psi.apply_diag(1, -1, q)

    def _noisy(self, psi: StateVector, gate: Gate, copy: int):
        psi.apply_gate(gate)
        if copy == 0:
            self.origin += 1
        if gate.kind == "RZ":
            return  # virtual Z: error-free and instantaneous
        u = self.table[self.origin, copy]
        noise = self.noise
        if gate.is_two_qubit:
            a, b = gate.qubits
            if u[0] < noise.e2:
                k = 1 + min(int(u[1] * 15), 14)
                for letter, q in ((k & 3, a), (k >> 2, b)):
                    if letter:
                        _apply_letter(psi, _PAULI_1Q[letter - 1], q)
            gamma, p_phi = self.relax[2]
            self._relax(psi, a, gamma, p_phi, u[2], u[3])
            self._relax(psi, b, gamma, p_phi, u[4], u[5])
        else:
            q = gate.qubits[0]
            if u[0] < noise.e1:
                _apply_letter(psi, _PAULI_1Q[min(int(u[1] * 3), 2)], q)
            gamma, p_phi = self.relax[1]
            self._relax(psi, q, gamma, p_phi, u[2], u[3])

    def renormalize(self, psi: StateVector):
        psi.data /= math.sqrt(self.norm2)
        self.norm2 = 1.0

    def apply(self, psi: StateVector, gate: Gate):
        if gate.kind == "SWAP":
            a, b = gate.qubits
            for c, t in ((a, b), (b, a), (a, b)):
                self._noisy(psi, Gate("CX", (c, t), fold_eligible=True), gate.copy)
        else:
            self._noisy(psi, gate, gate.copy)


def _run_trajectory(args) -> np.ndarray:
    circ, psi0_data, obs, noise, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    traj = _Trajectory(noise, rng, _origin_count(circ))
    psi = StateVector(circ.n_qubits, psi0_data.copy())
    values = [expectation(psi, obs, noise.e_read)]
    for sl in circ.step_slices():
        for g in circ.gates[sl]:
            traj.apply(psi, g)
        traj.renormalize(psi)
        values.append(expectation(psi, obs, noise.e_read))
    return np.array(values)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_noisy(circ: GateCircuit, psi0: StateVector, obs: PauliSum, noise: NoiseParams,
              runs: int = 10, seed: int = 0, workers: int | None = None,
              scale: str = "1") -> TrajectoryResult:
    """Mean and standard error of ``obs`` over ``runs`` seeded trajectories.

    Trajectory ``i`` always uses the ``i``-th child of ``SeedSequence(seed)``,
    so results do not depend on the worker count.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    times = circ.dt * np.arange(circ.n_steps + 1)
    if noise.is_ideal:
        values = np.array([expectation(s, obs) for s in evolve_statevector(circ, psi0)])
        samples = np.tile(values, (runs, 1))
    else:
        seeds = np.random.SeedSequence(seed).spawn(runs)
        tasks = [(circ, psi0.data, obs, noise, s) for s in seeds]
        workers = min(workers or default_workers(), runs)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                samples = np.array(list(pool.map(_run_trajectory, tasks)))
        else:
            samples = np.array([_run_trajectory(t) for t in tasks])
    if noise.is_ideal or runs == 1:
        mean, stderr = samples[0].copy(), np.zeros(samples.shape[1])
    else:
        mean = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / math.sqrt(runs)
    return TrajectoryResult(times, mean, stderr, runs, scale, samples)


def excited_population(system: CavityHamiltonian) -> PauliSum:
    return system.level_population(EXCITED)
