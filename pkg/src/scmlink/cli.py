"""Command-line front end.

Examples::

    scmlink list-presets
    scmlink simulate --preset fig4.4-2path --fast --out curve.csv --plot curve.svg
    scmlink simulate --preset fig4.5-2x4 --snr 5:14 --blocks 4000 --fast
    scmlink simulate --config my_experiment.cfg
    scmlink aoa --preset scm-case2 --out angles.csv

Config files are flat ``key=value`` text; keys mirror the
:class:`scmlink.harness.ExperimentConfig` field paths with dots, e.g.::

    name=custom-2path
    channel_kind=rayleigh
    num_rx_antennas=2
    modulation.family=psk
    modulation.order=2
    rayleigh.tap_delays_s=0,1.6e-6
    rayleigh.tap_powers=0.5,0.5
    rayleigh.doppler_hz=100
    snr_db=5,7,9,11
    coding=none

Exit codes: 0 success, 2 configuration error, 3 IO error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import types
import typing

from . import emit, harness, presets

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(Exception):
    """User-facing configuration problem; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scmlink",
        description="Link-level MIMO-OFDM simulation over geometric and Rayleigh channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER-vs-SNR Monte-Carlo sweep")
    sim.add_argument("--preset", help="experiment preset name (see list-presets)")
    sim.add_argument("--config", help="flat key=value file overriding config fields")
    sim.add_argument("--snr", help="SNR grid A:B[:step] in dB, inclusive")
    sim.add_argument("--blocks", type=int, help="OFDM data symbols per SNR point")
    sim.add_argument("--seed", type=int, help="experiment seed")
    sim.add_argument("--out", help="write the curve CSV here (plus .meta.json sidecar)")
    sim.add_argument("--plot", help="write a log-scale BER-vs-SNR SVG here")
    sim.add_argument(
        "--strict-paper-params",
        action="store_true",
        help="keep the full 5 us delay budget on random SCM delay draws instead "
        "of clamping them to the guard interval (violations are recorded as "
        "metadata warnings)",
    )
    sim.add_argument(
        "--fast",
        action="store_true",
        help="stop each SNR point after 500 bit errors instead of running all blocks",
    )

    aoa = sub.add_parser("aoa", help="run a direction-finding scene")
    aoa.add_argument("--preset", help="scene preset: scm-case1, scm-case2, scm-case3")
    aoa.add_argument("--out", help="write the per-user angle table CSV here")

    sub.add_parser("list-presets", help="print the preset catalog")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            return _cmd_list()
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_aoa(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


def _cmd_list() -> int:
    for name in presets.PRESET_NAMES:
        kind = "aoa scene" if name in presets.AOA_PRESET_NAMES else "ber sweep"
        print(f"{name:24s} {kind}")
    return EXIT_OK


def _lookup(name: str, strict: bool):
    try:
        return presets.preset(name, strict_paper_params=strict)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None


def _cmd_simulate(args) -> int:
    config = _resolve_chain_config(args)

    def progress(line: str) -> None:
        print(line, file=sys.stderr, flush=True)

    curve = harness.run_ber_sweep(config, progress=progress)
    for warning in curve.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.out:
        emit.emit(curve, args.out, format="csv")
        print(f"wrote {args.out} and {args.out}.meta.json", file=sys.stderr)
    if args.plot:
        emit.emit(curve, args.plot, format="svg")
        print(f"wrote {args.plot}", file=sys.stderr)
    if not args.out:
        sys.stdout.write(emit.csv_body(curve))
    return EXIT_OK


def _cmd_aoa(args) -> int:
    if not args.preset:
        raise ConfigError("aoa needs --preset (one of: " + ", ".join(presets.AOA_PRESET_NAMES) + ")")
    case = _lookup(args.preset, False)
    if not isinstance(case, harness.AoaCaseConfig):
        raise ConfigError(
            f"preset {args.preset!r} is a BER sweep; run `scmlink simulate --preset {args.preset}`"
        )
    report = harness.run_aoa_case(case)
    print(
        f"{report.name}: tensor dims {list(report.tensor_dims)}, "
        f"{report.elapsed_s:.2f} s"
    )
    print("user  aoa_estimate_deg  configured_aoa_deg  distance_m  direction_deg")
    for user, est, truth, dist, direction in emit.aoa_rows(report):
        print(f"{user:4d}  {est:16.4f}  {truth:18.4f}  {dist:10.4f}  {direction:13.4f}")
    if args.out:
        emit.emit_aoa(report, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _resolve_chain_config(args) -> harness.ExperimentConfig:
    if not args.preset and not args.config:
        raise ConfigError("simulate needs --preset and/or --config")
    base = None
    if args.preset:
        base = _lookup(args.preset, args.strict_paper_params)
        if isinstance(base, harness.AoaCaseConfig):
            raise ConfigError(
                f"preset {args.preset!r} is a direction-finding scene; "
                f"run `scmlink aoa --preset {args.preset}`"
            )
    if args.config:
        config = _apply_tree(base, _read_config_file(args.config))
    else:
        config = base

    updates = {}
    if args.snr:
        updates["snr_db"] = _parse_snr(args.snr)
    if args.blocks is not None:
        updates["num_blocks"] = args.blocks
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.fast:
        updates["fast"] = True
    if updates:
        config = dataclasses.replace(config, **updates)
    return config


def _parse_snr(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--snr expects A:B or A:B:step, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
    except ValueError:
        raise ConfigError(f"--snr expects numbers, got {text!r}") from None
    if step <= 0:
        raise ConfigError(f"--snr step must be positive, got {step}")
    if hi < lo:
        raise ConfigError(f"--snr range is empty: {text!r}")
    count = int(round((hi - lo) / step))
    grid = [lo + i * step for i in range(count + 1)]
    while grid and grid[-1] > hi + 1e-9:
        grid.pop()
    return tuple(grid)


def _read_config_file(path) -> dict:
    """Parse flat key=value lines into a nested override tree."""
    tree: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            node = tree
            parts = key.split(".")
            for part in parts[:-1]:
                nxt = node.setdefault(part, {})
                if not isinstance(nxt, dict):
                    raise ConfigError(
                        f"{path}:{lineno}: {key!r} conflicts with an earlier scalar value"
                    )
                node = nxt
            if isinstance(node.get(parts[-1]), dict):
                raise ConfigError(
                    f"{path}:{lineno}: {key!r} conflicts with earlier dotted keys"
                )
            node[parts[-1]] = value
    return tree


def _apply_tree(base, tree: dict) -> harness.ExperimentConfig:
    hints = typing.get_type_hints(harness.ExperimentConfig)
    kwargs = {}
    for key, sub in tree.items():
        if key not in hints:
            raise ConfigError(
                f"unknown config key {key!r}; top-level keys: {', '.join(sorted(hints))}"
            )
        current = getattr(base, key) if base is not None else None
        kwargs[key] = _build_value(hints[key], current, sub, key)
    if base is not None:
        return dataclasses.replace(base, **kwargs)
    kwargs.setdefault("name", "custom")
    try:
        return harness.ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _build_value(typ, current, tree, path: str):
    if isinstance(tree, str):
        return _coerce_leaf(tree, typ, path)
    dc = _dataclass_member(typ)
    if dc is None:
        raise ConfigError(f"{path}: field does not take dotted subkeys")
    hints = typing.get_type_hints(dc)
    kwargs = {}
    for key, sub in tree.items():
        if key not in hints:
            raise ConfigError(f"{path}.{key}: unknown field; known: {', '.join(sorted(hints))}")
        cur = getattr(current, key, None) if current is not None else None
        kwargs[key] = _build_value(hints[key], cur, sub, f"{path}.{key}")
    if current is not None:
        return dataclasses.replace(current, **kwargs)
    try:
        return dc(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _members(typ) -> tuple[list, bool]:
    """Non-None union members and whether None is allowed."""
    origin = typing.get_origin(typ)
    if origin is typing.Union or origin is types.UnionType:
        args = typing.get_args(typ)
        return [m for m in args if m is not type(None)], type(None) in args
    return [typ], False


def _dataclass_member(typ):
    for member in _members(typ)[0]:
        if dataclasses.is_dataclass(member):
            return member
    return None


def _coerce_leaf(text: str, typ, path: str):
    members, allow_none = _members(typ)
    if text.lower() in ("none", "null"):
        if allow_none:
            return None
        raise ConfigError(f"{path}: may not be none")
    for member in members:
        if typing.get_origin(member) is tuple:
            elem = typing.get_args(member)[0]
            if text == "":
                return ()
            return tuple(_coerce_scalar(p.strip(), elem, path) for p in text.split(","))
    return _coerce_scalar(text, members[0], path)


def _coerce_scalar(text: str, typ, path: str):
    if dataclasses.is_dataclass(typ):
        raise ConfigError(f"{path}: set subfields with dotted keys ({path}.<field>=...)")
    if typ is bool:
        low = text.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{path}: expected true/false, got {text!r}")
    if typ is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{path}: expected an integer, got {text!r}") from None
    if typ is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{path}: expected a number, got {text!r}") from None
    if typ is str:
        return text
    raise ConfigError(f"{path}: unsupported field type {typ!r}")


if __name__ == "__main__":
    sys.exit(main())
