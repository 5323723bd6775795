"""``simulate`` command line.

    simulate settle|scaling|worst-case|stationary|baseline|hierarchy|reach [flags]

Flags may also come from ``--config FILE`` holding ``name = value`` lines with
the flag names; flags given on the command line win. Exit status is 0 on
success, 1 for configuration errors and 2 for runtime failures.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig, run
from .records import EmitError, render

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# flag name -> (config attribute, parser)
def _bool(s: str) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(s).replace(" ", "").split(",") if x)


OPTIONS = {
    "n": ("n", int),
    "m": ("m", int),
    "seed": ("seed", int),
    "steps": ("steps", int),
    "probes": ("probes_per_step", int),
    "trials": ("trials", int),
    "queries": ("queries", int),
    "shortcuts": ("shortcut_count", int),
    "comparison": ("comparison", _bool),
    "bootstrap": ("bootstrap", str),
    "sizes": ("sizes", _ints),
    "c-local": ("c_local", int),
    "c-short": ("c_short", int),
    "m-exp": ("m_exp", int),
    "budget-factor": ("budget_factor", int),
    "far-pairs": ("far_pairs", _bool),
    "offsets": ("offsets", _ints),
    "modulus": ("modulus", int),
    "signed": ("signed", _bool),
    "tol": ("tol", float),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="simulate", description="Harmonic-shortcut DHT experiments.")
    p.add_argument("experiment", choices=["settle", "scaling", "worst-case", "stationary",
                                          "baseline", "hierarchy", "reach"])
    p.add_argument("--config", type=Path, help="key = value file with flag names")
    for flag in OPTIONS:
        if OPTIONS[flag][1] is _bool:
            p.add_argument(f"--{flag}", nargs="?", const="true", default=None)
        else:
            p.add_argument(f"--{flag}", default=None)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=["csv", "json"], default=None)
    return p


def read_config_file(path: Path) -> dict[str, str]:
    out = {}
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'name = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        k = k.replace("_", "-")
        if k not in OPTIONS and k not in ("out", "format"):
            raise ConfigError(f"{path}:{lineno}: unknown option {k!r}")
        out[k] = v
    return out


def resolve(argv: list[str]) -> tuple[ExperimentConfig, Path | None, str]:
    args = build_parser().parse_args(argv)
    raw = read_config_file(args.config) if args.config else {}
    for flag in OPTIONS:
        v = getattr(args, flag.replace("-", "_"))
        if v is not None:
            raw[flag] = v
    kw = {}
    for flag, value in raw.items():
        if flag in ("out", "format"):
            continue
        attr, conv = OPTIONS[flag]
        try:
            kw[attr] = conv(value)
        except ValueError as e:
            raise ConfigError(f"--{flag}: {e}") from e
    out = args.out if args.out is not None else (Path(raw["out"]) if "out" in raw else None)
    fmt = args.format or raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    cfg = ExperimentConfig.for_experiment(args.experiment.replace("-", "_"), **kw)
    return cfg, out, fmt


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, out, fmt = resolve(argv)
    except (ConfigError, TypeError) as e:
        print(f"simulate: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        fields, records = run(cfg)
        text = render(records, fmt, cfg.to_dict(), fields)
        if out is None:
            sys.stdout.write(text)
        else:
            try:
                out.write_text(text)
            except OSError as e:
                raise EmitError(f"cannot write {out}: {e}") from e
    except ConfigError as e:
        print(f"simulate: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - surfaced as exit status 2
        print(f"simulate: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
