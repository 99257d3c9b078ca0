"""Configuration-driven experiment pipeline: build, compile, route, simulate, mitigate."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import (
    CavityConfig, CavityHamiltonian, LocalizedBasisConfig, MatterLevels,
    build_localized, build_standing_waves,
)
from .circuits import CouplingMap, GateCircuit, GateMetrics, gate_metrics, n_steps_for, route, trotterize
from .config import MAX_QUBITS, SWEEP_KEYS, ConfigError, ExperimentConfig, coerce
from .mitigation import FoldPlan, ZNEResult, zne
from .simulate import (
    NoiseParams, exact_oracle, excited_population, expectation,
    evolve_statevector, noise_profile, prepare_initial_state, run_noisy, scale_noise,
)

log = logging.getLogger(__name__)

FMT = "%.10e"
DYNAMICS_COLUMNS = ("t", "noiseless", "oracle", "noisy_mean", "noisy_stderr", "zne")
_INLINE = {"e1": "e1", "e2": "e2", "e_read": "e_read", "T1": "t1", "T2": "t2", "t_1q": "t_1q", "t_2q": "t_2q"}


def build_system(cfg: ExperimentConfig) -> CavityHamiltonian:
    matter = MatterLevels(energies=(cfg.epsilon_g, cfg.epsilon_e), dipole=cfg.dipole)
    cavity = CavityConfig(length=cfg.L, n_modes=cfg.N_ph, z0=cfg.z0, n_max=cfg.n_max,
                          rwa=cfg.rwa, boson_mapper=cfg.boson_mapper)
    if cfg.approach == "standing_waves":
        return build_standing_waves(matter, cavity)
    loc = LocalizedBasisConfig(n_loc=cfg.N_loc, sigma_support=cfg.sigma_support,
                               tau_bandwidth=cfg.tau_bandwidth, projection=cfg.projection)
    return build_localized(matter, cavity, loc)


def resolve_noise(cfg: ExperimentConfig) -> NoiseParams | None:
    """Profile (or inline parameters), then per-field overrides, then ``eta`` scaling."""
    overrides = {_INLINE[k]: getattr(cfg, k) for k in _INLINE if getattr(cfg, k) is not None}
    if cfg.noise == "none":
        if overrides:
            raise ConfigError("noise: inline noise parameters given with noise = none")
        return None
    if cfg.noise == "inline":
        missing = [k for k in ("e1", "e2", "e_read") if getattr(cfg, k) is None]
        if missing:
            raise ConfigError(f"{missing[0]}: required when noise = inline")
        base = NoiseParams(**overrides, name="inline")
    else:
        try:
            base = noise_profile(cfg.noise)
        except ValueError as exc:
            raise ConfigError(f"noise: {exc}") from None
        if overrides:
            fields_ = {f.name: getattr(base, f.name) for f in fields(base)}
            fields_.update(overrides)
            base = NoiseParams(**fields_)
    return scale_noise(base, cfg.eta)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    system: CavityHamiltonian
    circuit: GateCircuit
    routed: GateCircuit
    metrics: GateMetrics
    times: np.ndarray
    noiseless: np.ndarray
    oracle: np.ndarray
    noisy_mean: np.ndarray
    noisy_stderr: np.ndarray
    zne: np.ndarray
    zne_result: ZNEResult | None = None

    @property
    def n_qubits(self) -> int:
        return self.system.n_qubits

    def dynamics_rows(self) -> np.ndarray:
        return np.column_stack([self.times, self.noiseless, self.oracle,
                                self.noisy_mean, self.noisy_stderr, self.zne])


def _check_size(cfg: ExperimentConfig, n_qubits: int):
    if n_qubits > MAX_QUBITS:
        raise ConfigError(
            f"N_ph: {n_qubits} qubits exceed the statevector cap of {MAX_QUBITS}; refusing to run"
        )


def compile_experiment(cfg: ExperimentConfig):
    system = build_system(cfg)
    _check_size(cfg, system.n_qubits)
    steps = n_steps_for(cfg.t_final, cfg.dt)
    circ = trotterize(system.pauli, steps * cfg.dt, steps, system.layout)
    try:
        cmap = CouplingMap.preset(cfg.coupling_map, system.n_qubits)
    except ValueError as exc:
        raise ConfigError(f"coupling_map: {exc}") from None
    routed = route(circ, cmap) if steps else circ
    return system, circ, routed


def run_experiment(cfg: ExperimentConfig, simulate_noise: bool = True) -> ExperimentResult:
    system, circ, routed = compile_experiment(cfg)
    steps = circ.n_steps
    times = cfg.dt * np.arange(steps + 1)
    log.info("%s: %d qubits, %d steps, %d CX routed", cfg.approach, system.n_qubits, steps, routed.cx_count())

    obs = excited_population(system)
    psi0 = prepare_initial_state(system.layout)
    noiseless = np.array([expectation(s, obs) for s in evolve_statevector(circ, psi0)])
    nan = np.full(steps + 1, np.nan)
    oracle = exact_oracle(system, times) if (system.rwa and system.n_max == 1) else nan.copy()

    noise = resolve_noise(cfg)
    noisy_mean, noisy_stderr, mitigated, zres = nan.copy(), nan.copy(), nan.copy(), None
    if simulate_noise and noise is not None:
        if cfg.zne:
            plan = FoldPlan(cfg.fraction_list(), runs=cfg.runs, seed=cfg.seed, abscissa=cfg.zne_abscissa)
            zres = zne(routed, psi0, obs, plan, noise)
            noisy_mean, noisy_stderr = zres.results[0].mean, zres.results[0].stderr
            mitigated = zres.mitigated
        else:
            res = run_noisy(routed, psi0, obs, noise, cfg.runs, cfg.seed)
            noisy_mean, noisy_stderr = res.mean, res.stderr
    return ExperimentResult(cfg, system, circ, routed, gate_metrics(routed), times,
                            noiseless, oracle, noisy_mean, noisy_stderr, mitigated, zres)


# ---------------------------------------------------------------- output

def _table(header: list[str], rows, comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, np.integer, str)) else FMT % v for v in row])
    return buf.getvalue()


def _hash_comment(cfg: ExperimentConfig) -> str:
    return f"config_hash={cfg.digest()}"


def manifest_text(result: ExperimentResult) -> str:
    cfg = result.config
    m = result.metrics
    matter_load = max(m.per_step_load(q) for q in result.system.matter_qubits)
    lines = [f"# cavqed {__version__} run manifest", f"# {_hash_comment(cfg)}", *cfg.lines(),
             "", "# resolved run"]
    lines += [
        f"n_qubits = {result.n_qubits}",
        f"steps = {result.circuit.n_steps}",
        f"actual_t_final = {FMT % result.times[-1]}",
        f"total_cx = {m.total_cx}",
        f"total_swaps = {sum(m.swaps_per_step)}",
        f"matter_cx_per_step = {FMT % matter_load}",
        f"seed = {cfg.seed}",
    ]
    noise = resolve_noise(cfg)
    if noise is not None:
        lines.append(f"noise_model = {noise}")
    if result.zne_result is not None:
        lines.append("zne_scales = " + ",".join(FMT % s for s in result.zne_result.scales))
    return "\n".join(lines) + "\n"


def write_outputs(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    comment = _hash_comment(result.config)
    files = {
        "dynamics.csv": _table(list(DYNAMICS_COLUMNS), result.dynamics_rows(), comment),
        "metrics.csv": result.metrics.to_csv(comment),
        "manifest.txt": manifest_text(result),
    }
    if result.zne_result is not None:
        files["zne.csv"] = result.zne_result.to_csv(comment, FMT)
    paths = []
    for name, text in files.items():
        (out / name).write_text(text)
        paths.append(out / name)
    return paths


def run(cfg: ExperimentConfig, outdir: str | Path | None = None) -> ExperimentResult:
    result = run_experiment(cfg)
    write_outputs(result, outdir or cfg.output)
    return result


def metrics_only(cfg: ExperimentConfig, outdir: str | Path | None = None) -> GateMetrics:
    system, circ, routed = compile_experiment(cfg)
    m = gate_metrics(routed)
    out = Path(outdir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(m.to_csv(_hash_comment(cfg)))
    return m


# ---------------------------------------------------------------- sweeps

def _reference_oracle(cfg: ExperimentConfig, times: np.ndarray) -> np.ndarray:
    """Standing-waves single-excitation oracle for the same cavity."""
    ref = cfg.replace(approach="standing_waves", N_loc=None, sigma_support=None, rwa=True, n_max=1)
    return exact_oracle(build_system(ref), times)


def sweep(cfg: ExperimentConfig, key: str, values, outdir: str | Path | None = None):
    """One run per value of ``key``; writes a combined CSV and a summary table.

    The summary holds, per value, the maximum deviation of the noiseless curve
    from the standing-waves oracle of the same cavity.
    """
    if key not in SWEEP_KEYS:
        raise ConfigError(f"{key}: cannot sweep; choose from {', '.join(SWEEP_KEYS)}")
    values = [coerce(key, str(v)) for v in values]
    if not values:
        raise ConfigError(f"{key}: empty value list")
    configs = [cfg.replace(**{key: v}) for v in values]
    for c in configs:
        _check_size(c, build_system(c).n_qubits)
    out = Path(outdir or cfg.output)
    rows, summary, results = [], [], []
    for v, c in zip(values, configs):
        log.info("sweep %s = %s", key, v)
        res = run_experiment(c)
        write_outputs(res, out / f"{key}={v}")
        ref = _reference_oracle(c, res.times)
        for k, t in enumerate(res.times):
            rows.append([v, t, res.noiseless[k], res.oracle[k], ref[k],
                         res.noisy_mean[k], res.noisy_stderr[k], res.zne[k]])
        noisy_dev = np.nan if np.all(np.isnan(res.noisy_mean)) else float(np.max(np.abs(res.noisy_mean - res.noiseless)))
        summary.append([v, res.n_qubits, res.metrics.total_cx,
                        float(np.max(np.abs(res.noiseless - ref))), noisy_dev])
        results.append(res)
    comment = f"config_hash={cfg.digest()} sweep={key}"
    out.mkdir(parents=True, exist_ok=True)
    (out / f"sweep_{key}.csv").write_text(_table(
        [key, "t", "noiseless", "oracle", "reference", "noisy_mean", "noisy_stderr", "zne"], rows, comment))
    (out / f"sweep_{key}_summary.csv").write_text(_table(
        [key, "n_qubits", "total_cx", "max_dev_vs_reference", "max_noisy_dev"], summary, comment))
    return results, summary
