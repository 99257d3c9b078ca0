"""Zero-noise extrapolation by partial two-qubit gate folding."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .circuits import Gate, GateCircuit, cx
from .simulate import NoiseParams, StateVector, TrajectoryResult, run_noisy
from .pauli import PauliSum

DEFAULT_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)


@dataclass(frozen=True)
class FoldPlan:
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    selection: str = "stride"
    runs: int = 10
    seed: int = 0
    abscissa: str = "scale"

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        object.__setattr__(self, "fractions", fr)
        if any(not 0.0 <= f <= 1.0 for f in fr):
            raise ValueError("folding fractions must lie in [0, 1]")
        if list(fr) != sorted(fr) or len(set(fr)) != len(fr):
            raise ValueError("folding fractions must be strictly ascending")
        if 0.0 not in fr:
            raise ValueError("folding fractions must include 0")
        if self.selection not in ("stride", "random"):
            raise ValueError(f"unknown selection rule {self.selection!r}")
        if self.abscissa not in ("scale", "fraction"):
            raise ValueError(f"unknown abscissa {self.abscissa!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


def _expand_swaps(gates) -> list[Gate]:
    out = []
    for g in gates:
        if g.kind == "SWAP":
            a, b = g.qubits
            out += [cx(a, b), cx(b, a), cx(a, b)]
        else:
            out.append(g)
    return out


def _stride(n: int, k: int) -> list[int]:
    """``k`` evenly spread picks out of ``n`` slots."""
    return [int((i + 0.5) * n / k) for i in range(k)]


def fold(circ: GateCircuit, fraction: float, seed: int | None = None,
         selection: str = "stride") -> GateCircuit:
    """Replace ``floor(fraction * n_cx)`` CX gates of every step by ``G G G``.

    SWAPs are expanded into three CX first so they can be folded too.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if fraction == 0.0:
        return circ
    rng = np.random.default_rng(seed)
    steps = []
    for sl in circ.step_slices():
        gates = _expand_swaps(circ.gates[sl])
        eligible = [i for i, g in enumerate(gates) if g.fold_eligible and g.is_two_qubit]
        k = math.floor(fraction * len(eligible) + 1e-9)
        if k == 0:
            steps.append(gates)
            continue
        if selection == "stride":
            picks = {eligible[j] for j in _stride(len(eligible), k)}
        else:
            picks = set(rng.choice(eligible, size=k, replace=False).tolist())
        folded = []
        for i, g in enumerate(gates):
            if i in picks:
                folded += [g, replace(g, copy=1), replace(g, copy=2)]
            else:
                folded.append(g)
        steps.append(folded)
    gates, bounds = [], []
    for step in steps:
        gates.extend(step)
        bounds.append(len(gates))
    meta = dict(circ.meta, fold_fraction=fraction)
    return GateCircuit(circ.n_qubits, tuple(gates), tuple(bounds), circ.dt, meta)


def noise_scale(folded: GateCircuit, original: GateCircuit) -> float:
    """Realised two-qubit noise amplification, ``n_cx(folded) / n_cx(original)``."""
    base = original.cx_count()
    return folded.cx_count() / base if base else 1.0


@dataclass
class LinearFit:
    intercept: np.ndarray
    slope: np.ndarray
    residual: np.ndarray
    intercept_stderr: np.ndarray


def fit_linear(x, y, y_err=None) -> LinearFit:
    """Least-squares line through ``y[i, :]`` versus ``x[i]`` for every column."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if len(x) < 2:
        raise ValueError("need at least two points for a linear fit")
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    rms = np.sqrt(np.mean(resid ** 2, axis=0))
    weights = np.linalg.pinv(design)[0]
    if y_err is None:
        se = np.zeros(y.shape[1])
    else:
        se = np.sqrt(np.sum((weights[:, None] * np.asarray(y_err, dtype=float)) ** 2, axis=0))
    return LinearFit(coef[0], coef[1], rms, se)


@dataclass
class ZNEResult:
    times: np.ndarray
    fractions: tuple[float, ...]
    scales: np.ndarray
    results: list[TrajectoryResult]
    fit: LinearFit
    abscissa: str = "scale"
    extra: dict = field(default_factory=dict)

    @property
    def mitigated(self) -> np.ndarray:
        return self.fit.intercept

    @property
    def unmitigated(self) -> np.ndarray:
        return self.results[0].mean

    def to_csv(self, header_comment: str | None = None, fmt: str = "%.10e") -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "fraction", "mean", "stderr"])
        for k, t in enumerate(self.times):
            for f, res in zip(self.fractions, self.results):
                w.writerow([fmt % t, fmt % f, fmt % res.mean[k], fmt % res.stderr[k]])
            w.writerow([fmt % t, fmt % -1.0, fmt % self.fit.intercept[k], fmt % self.fit.intercept_stderr[k]])
        return buf.getvalue()


def zne(circ: GateCircuit, psi0: StateVector, obs: PauliSum, plan: FoldPlan,
        noise: NoiseParams, workers: int | None = None) -> ZNEResult:
    """Fold, simulate every fraction, and extrapolate each time point linearly.

    With ``abscissa="scale"`` the fit runs against the realised amplification
    ``n_cx(folded)/n_cx`` and is evaluated at zero noise; with ``"fraction"``
    it runs against the folding fraction and is evaluated at fraction 0.
    Every fraction reuses the same seed so the runs share random streams.
    """
    if len(plan.fractions) < 2:
        raise ValueError("zero-noise extrapolation needs at least two folding fractions")
    results, scales = [], []
    for f in plan.fractions:
        folded = fold(circ, f, seed=plan.seed, selection=plan.selection)
        scales.append(noise_scale(folded, circ))
        results.append(run_noisy(folded, psi0, obs, noise, plan.runs, plan.seed, workers, scale=f"{f:g}"))
    scales = np.array(scales)
    x = scales if plan.abscissa == "scale" else np.array(plan.fractions)
    means = np.array([r.mean for r in results])
    errs = np.array([r.stderr for r in results])
    fit = fit_linear(x, means, errs)
    return ZNEResult(results[0].times, plan.fractions, scales, results, fit, plan.abscissa)
