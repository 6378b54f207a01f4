"""Command-line entry point.

Subcommands
-----------
optimize   run the three-stage optimizer on one scenario, print JSON
sweep      run a sweep definition file to CSV (+ JSON metadata sidecar)
validate   compare the closed forms against the Monte Carlo oracle
phasor     evaluate the unit-phasor residual of a cancellation scheme

Configuration files are flat ``key = value`` text ('#' starts a comment).
Keys mirror the SystemConfig field names; power-like keys also accept a
``_dbm`` suffix (e.g. ``power_pt_dbm = 0``).  ``deployment_region`` takes
two comma-separated bounds.  Sweep definitions live in the same file
under ``sweep_parameter``, ``sweep_values``, ``drops_per_point``,
``algorithms``, and optionally ``fpa_samples``.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
scenario, 3 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    InfeasibleRegionError,
    InfeasibleSearchError,
    PacrError,
    SingularityError,
)
from .experiments import SweepSpec, sweep, write_sweep_csv
from .model import SystemConfig, Vec3, average_channel_gain, dbm_to_watts
from .montecarlo import mc_ase, mc_channel_gain, substream
from .optimizer import (
    CancelMode,
    coarse_placement,
    gap_fraction,
    residual_phasor_sum,
    target_phases,
    three_stage,
)

_USAGE_EXIT = 1
_INFEASIBLE_EXIT = 2
_VALIDATION_EXIT = 3

_INT_FIELDS = {"pa_count_primary", "pa_count_secondary", "k_max"}
_POWER_FIELDS = {"power_pt", "power_st_max", "interference_threshold",
                 "noise_power"}
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_SWEEP_KEYS = {"sweep_parameter", "sweep_values", "drops_per_point",
               "algorithms", "fpa_samples"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def read_key_values(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise ConfigError(f"{path}:{lineno}: empty key or value")
            if key in entries:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = value
    return entries


def build_config(entries: dict[str, str],
                 allow_sweep_keys: bool = False) -> SystemConfig:
    kwargs = {}
    for key, value in entries.items():
        if allow_sweep_keys and key in _SWEEP_KEYS:
            continue
        base = key[:-4] if key.endswith("_dbm") else key
        if base not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        if key.endswith("_dbm"):
            if base not in _POWER_FIELDS:
                raise ConfigError(f"{key!r}: dBm only applies to power keys")
            kwargs[base] = dbm_to_watts(float(value))
        elif base in _INT_FIELDS:
            kwargs[base] = int(value)
        elif base == "deployment_region":
            parts = value.split(",")
            if len(parts) != 2:
                raise ConfigError("deployment_region needs two bounds")
            kwargs[base] = (float(parts[0]), float(parts[1]))
        else:
            kwargs[base] = float(value)
    return SystemConfig(**kwargs)


def _parse_vec3(text: str) -> Vec3:
    parts = text.split(",")
    if len(parts) != 3:
        raise _UsageError(f"expected 'x,y,z', got {text!r}")
    return Vec3(*(float(p) for p in parts))


def _load_config(args, allow_sweep_keys=False) -> SystemConfig:
    if getattr(args, "config", None):
        entries = read_key_values(args.config)
        config = build_config(entries, allow_sweep_keys=allow_sweep_keys)
    else:
        config = SystemConfig()
    if getattr(args, "kmax", None) is not None:
        config = dataclasses.replace(config, k_max=args.kmax)
    return config


def _banner(args) -> None:
    if not args.quiet:
        print(f"pacr {__version__}")


def _cmd_optimize(args) -> int:
    config = _load_config(args)
    pu = _parse_vec3(args.pu)
    su = _parse_vec3(args.su)
    mode = CancelMode(args.mode)
    solution = three_stage(pu, su, config, mode)
    n_gaps_pt = config.pa_count_primary - 1
    trace = [
        {
            "stage": "PT" if i < n_gaps_pt else "ST",
            "gap": (i + 2) if i < n_gaps_pt else (i - n_gaps_pt + 2),
            "k_intended": r.k_intended,
            "k_unintended": r.k_unintended,
            "delta_x_m": r.delta_x,
            "residual_mismatch_m": r.residual_mismatch,
        }
        for i, r in enumerate(solution.search_trace)
    ]
    payload = {
        "mode": mode.value,
        "layout_pt": list(solution.layout_pt.xs),
        "layout_st": list(solution.layout_st.xs),
        "p_st_w": solution.p_st,
        "ase": {
            "ase_pu": solution.report.ase_pu,
            "ase_su": solution.report.ase_su,
            "sum_se": solution.report.sum_se,
            "gain_pu_pt": solution.report.gain_pu_pt,
            "gain_pu_st": solution.report.gain_pu_st,
            "gain_su_pt": solution.report.gain_su_pt,
            "gain_su_st": solution.report.gain_su_st,
            "interference_pu_w": solution.report.interference_pu,
        },
        "search_trace": trace,
    }
    _banner(args)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    entries = read_key_values(args.config)
    config = build_config(entries, allow_sweep_keys=True)
    missing = {"sweep_parameter", "sweep_values", "drops_per_point",
               "algorithms"} - entries.keys()
    if missing:
        raise ConfigError(f"sweep file lacks keys: {sorted(missing)}")
    parameter = entries["sweep_parameter"]
    raw_values = [v.strip() for v in entries["sweep_values"].split(",")]
    if parameter in ("n_primary", "m_secondary"):
        values = [int(v) for v in raw_values]
    else:
        values = [float(v) for v in raw_values]
    algorithms = tuple(a.strip().upper()
                       for a in entries["algorithms"].split(","))
    spec = SweepSpec(
        swept_parameter=parameter,
        values=values,
        drops_per_point=int(entries["drops_per_point"]),
        algorithms=algorithms,
        base_config=config,
        seed=args.seed,
        fpa_samples=int(entries.get("fpa_samples", "1000")),
    )
    rows = sweep(spec)
    write_sweep_csv(rows, args.out, spec)
    _banner(args)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _validation_cases(config: SystemConfig, seed: int):
    """Randomized layouts/users cycling the Ricean factor, for `validate`."""
    rng = substream(seed, 0)
    kappas = (0.0, 1.0, 4.0, 20.0)
    cases = []
    for i in range(20):
        cfg = dataclasses.replace(config, ricean_factor=kappas[i % 4])
        count = int(rng.integers(1, 7))
        role = "PT" if i % 2 == 0 else "ST"
        anchor = rng.uniform(1.0, cfg.waveguide_length - 1.0)
        layout = coarse_placement(anchor, count, role, cfg)
        half = cfg.user_region_width / 2.0
        user = Vec3(rng.uniform(0.0, cfg.waveguide_length),
                    rng.uniform(cfg.waveguide_y(role) - half,
                                cfg.waveguide_y(role) + half),
                    0.0)
        cases.append((cfg, layout, user))
    return cases


def _cmd_validate(args) -> int:
    config = _load_config(args)
    _banner(args)
    failures = 0
    gain_misses = 0
    cases = _validation_cases(config, args.seed)
    for i, (cfg, layout, user) in enumerate(cases):
        closed = average_channel_gain(layout, user, cfg)
        est = mc_channel_gain(layout, user, cfg, args.samples,
                              seed=args.seed + i)
        gap = abs(est.mean - closed)
        ok = gap <= 3.0 * est.std_error
        gain_misses += 0 if ok else 1
        print(f"{'PASS' if ok else 'MISS'} gain case {i:2d} "
              f"(kappa={cfg.ricean_factor:g}, count={layout.count}): "
              f"|mc-closed|={gap:.3e}, 3*stderr={3 * est.std_error:.3e}")
    # An exact expectation should sit inside 3 sigma almost always; allow
    # the statistical few.
    if gain_misses > 2:
        failures += 1
        print(f"FAIL channel-gain oracle: {gain_misses}/20 outside 3 sigma")
    else:
        print(f"PASS channel-gain oracle: {20 - gain_misses}/20 within 3 sigma")

    pu = Vec3(7.5, config.waveguide_y("PT") + 1.0, 0.0)
    su = Vec3(7.5, config.waveguide_y("ST") - 1.0, 0.0)
    solution = three_stage(pu, su, config, CancelMode.EXACT_CANCEL)
    est_p, est_s, est_int = mc_ase(solution.layout_pt, solution.layout_st,
                                   solution.p_st, pu, su, config,
                                   args.samples, seed=args.seed + 100)
    mc_sum = est_p.mean + est_s.mean
    rel = abs(solution.report.sum_se - mc_sum) / mc_sum
    ok = rel <= 0.05
    if not ok:
        failures += 1
    print(f"{'PASS' if ok else 'FAIL'} average-SE closed form: "
          f"closed={solution.report.sum_se:.4f}, mc={mc_sum:.4f}, "
          f"relative gap={rel:.4%} (tolerance 5%)")
    print(f"interference at PU: closed={solution.report.interference_pu:.3e} W, "
          f"mc={est_int.mean:.3e} W (stderr {est_int.std_error:.1e})")
    return _VALIDATION_EXIT if failures else 0


def _cmd_phasor(args) -> int:
    count = args.count
    if count < 1:
        raise _UsageError("--count must be >= 1")
    if args.scheme == "uniform":
        fracs = [1.0 / count] * (count - 1)
    elif args.scheme == "pi":
        fracs = [0.5] * (count - 1)
    else:
        mode = CancelMode.LITERAL if args.scheme == "literal" \
            else CancelMode.EXACT_CANCEL
        fracs = [gap_fraction(count, gap, mode)
                 for gap in range(2, count + 1)]
    phases = 2.0 * math.pi * np.concatenate([[0.0], np.cumsum(fracs)])
    magnitude, total = residual_phasor_sum(phases)
    _banner(args)
    print(f"count={count} scheme={args.scheme}")
    print(f"target phases (cycles): "
          f"{[round(float(p) / (2 * math.pi) % 1.0, 6) for p in phases]}")
    print(f"residual magnitude: {magnitude!r}")
    print(f"residual sum: {total.real!r}{total.imag:+}j")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="pacr", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, samples=False):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the version banner")
        p.add_argument("--kmax", type=int, default=None,
                       help="override the integer search bound")
        if seed:
            p.add_argument("--seed", type=int, required=True)
        if samples:
            p.add_argument("--samples", type=int, default=100000)

    p_opt = sub.add_parser("optimize", help="run the three-stage optimizer")
    common(p_opt)
    p_opt.add_argument("--pu", required=True, help="primary user as x,y,z")
    p_opt.add_argument("--su", required=True, help="secondary user as x,y,z")
    p_opt.add_argument("--mode", choices=[m.value for m in CancelMode],
                       default=CancelMode.LITERAL.value)
    p_opt.set_defaults(func=_cmd_optimize)

    p_sweep = sub.add_parser("sweep", help="run a sweep definition to CSV")
    common(p_sweep, seed=True)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)
    # --config is optional in common(); sweep genuinely needs it.

    p_val = sub.add_parser("validate",
                           help="Monte Carlo validation of the closed forms")
    common(p_val, seed=True, samples=True)
    p_val.set_defaults(func=_cmd_validate)

    p_ph = sub.add_parser("phasor", help="unit-phasor residual of a scheme")
    p_ph.add_argument("--count", type=int, required=True)
    p_ph.add_argument("--scheme", required=True,
                      choices=["uniform", "pi", "literal", "exact-cancel"])
    p_ph.add_argument("--quiet", action="store_true")
    p_ph.set_defaults(func=_cmd_phasor)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep" and not args.config:
            raise _UsageError("sweep requires --config")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (InfeasibleRegionError, InfeasibleSearchError,
            SingularityError) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return _INFEASIBLE_EXIT
    except (ConfigError, PacrError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
