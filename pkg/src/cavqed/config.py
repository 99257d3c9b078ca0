"""Line-oriented ``key = value`` experiment configuration."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional

MAX_QUBITS = 24
SWEEP_KEYS = ("N_loc", "N_ph", "eta", "sigma_support")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    approach: str = "standing_waves"
    N_ph: int = 24
    L: float = 13000.0
    epsilon_g: float = -0.6738
    epsilon_e: float = -0.2798
    dipole: float = 60.0
    n_max: int = 1
    boson_mapper: str = "log"
    rwa: bool = True
    z0: Optional[float] = None
    dt: float = 0.075
    t_final: float = 2.0
    N_loc: Optional[int] = None
    sigma_support: Optional[int] = None
    tau_bandwidth: int = 1
    projection: str = "plane_wave"
    coupling_map: str = "heavy_hex"
    noise: str = "none"
    e1: Optional[float] = None
    e2: Optional[float] = None
    e_read: Optional[float] = None
    T1: Optional[float] = None
    T2: Optional[float] = None
    t_1q: Optional[float] = None
    t_2q: Optional[float] = None
    eta: float = 1.0
    zne: bool = False
    fractions: str = "0,0.1,0.2,0.3,0.4,0.5,0.6"
    zne_abscissa: str = "scale"
    runs: int = 10
    seed: int = 0
    output: str = "results"

    def __post_init__(self):
        if self.approach not in ("standing_waves", "localized"):
            raise ConfigError(f"approach: expected standing_waves or localized, got {self.approach!r}")
        if self.dt <= 0:
            raise ConfigError("dt: must be positive")
        if self.t_final < 0:
            raise ConfigError("t_final: must be non-negative")
        if self.approach == "localized":
            for key in ("N_loc", "sigma_support"):
                if getattr(self, key) is None:
                    raise ConfigError(f"{key}: required for the localized approach")
        else:
            for key in ("N_loc", "sigma_support"):
                if getattr(self, key) is not None:
                    raise ConfigError(f"{key}: only valid for the localized approach")
        if self.runs < 1:
            raise ConfigError("runs: must be >= 1")
        if self.eta <= 0:
            raise ConfigError("eta: must be positive")
        try:
            self.fraction_list()
        except ValueError as exc:
            raise ConfigError(f"fractions: {exc}") from None

    def fraction_list(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.fractions.split(",") if v.strip())

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def lines(self) -> list[str]:
        return [f"{f.name} = {_format(getattr(self, f.name))}" for f in fields(self)]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()[:16]


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


_TYPES = {}
for _f in fields(ExperimentConfig):
    _t = str(_f.type)
    _TYPES[_f.name] = (
        "int" if "int" in _t else "float" if "float" in _t else "bool" if "bool" in _t else "str",
        "Optional" in _t,
    )


def coerce(key: str, raw: str):
    if key not in _TYPES:
        raise ConfigError(f"{key}: unknown configuration key")
    kind, optional = _TYPES[key]
    raw = raw.strip()
    if optional and raw.lower() in ("none", ""):
        return None
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "1", "yes", "on")
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config(text: str, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        values[key] = coerce(key, raw)
    for key, raw in (overrides or {}).items():
        values[key] = coerce(key, raw)
    return ExperimentConfig(**values)


def bundled_configs() -> list[str]:
    root = resources.files("cavqed") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(name_or_path: str, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read a config file, or a bundled config by name (e.g. ``fig4a``)."""
    path = Path(name_or_path)
    if path.is_file():
        text = path.read_text()
    else:
        bundled = resources.files("cavqed") / "configs" / f"{name_or_path}.cfg"
        if not bundled.is_file():
            raise ConfigError(f"no config file or bundled config named {name_or_path!r}")
        text = bundled.read_text()
    return parse_config(text, overrides)
