"""Command line: ``cavqed run|sweep|metrics|list``."""
from __future__ import annotations

import argparse
import logging
import sys

from .cavity import ConfigurationError
from .circuits import NonHermitianError, RoutingError
from .config import SWEEP_KEYS, ConfigError, bundled_configs, load_config
from .runner import metrics_only, run, sweep
from .simulate import WORKERS_ENV


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value
    return out


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cavqed",
        description="Cavity-QED Trotter dynamics on qubits: build, route, simulate, mitigate.",
        epilog=f"Set {WORKERS_ENV} to bound the number of trajectory worker processes.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="config file path or bundled config name")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                        help="override a config value (repeatable)")
        sp.add_argument("--out", help="output directory (overrides the config's output)")

    common(sub.add_parser("run", help="run one experiment"))
    sp = sub.add_parser("sweep", help="one run per value of a config key")
    common(sp)
    sp.add_argument("--key", required=True, choices=SWEEP_KEYS)
    sp.add_argument("--values", required=True, help="comma-separated values")
    common(sub.add_parser("metrics", help="compile and route only; write gate metrics"))
    sub.add_parser("list", help="list bundled configs")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list":
            print("\n".join(bundled_configs()))
            return 0
        cfg = load_config(args.config, _overrides(args.set))
        out = args.out or cfg.output
        if args.command == "run":
            res = run(cfg, out)
            print(f"{res.n_qubits} qubits, {res.circuit.n_steps} steps, "
                  f"{res.metrics.total_cx} CX; wrote {out}")
        elif args.command == "sweep":
            values = [v for v in args.values.split(",") if v.strip()]
            _, summary = sweep(cfg, args.key, values, out)
            for row in summary:
                print(f"{args.key}={row[0]}: {row[1]} qubits, {row[2]} CX, "
                      f"max |dev| vs reference {row[3]:.4f}")
            print(f"wrote {out}")
        else:
            m = metrics_only(cfg, out)
            print(f"{m.total_cx} CX over {m.n_steps} steps, {sum(m.swaps_per_step)} SWAPs; wrote {out}")
    except (ConfigError, ConfigurationError, RoutingError, NonHermitianError) as exc:
        print(f"cavqed: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
