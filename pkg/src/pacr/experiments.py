"""Scenario generation, algorithm comparison, and parameter sweeps.

A "drop" is one random placement of the two users; every requested
algorithm is evaluated on the identical drop (common random numbers), and
a sweep averages drops per swept value.  Per-drop randomness is derived
from (seed, drop_index) only, so the same drop index reuses the same user
draws at every swept value; that keeps trend comparisons across values
low-noise.  Aggregates are a deterministic function of (spec, seed).

Algorithms
----------
PROPOSED     three-stage optimizer; odd counts use the exact-cancel rule
             (the zero-sum target table), which is what gives the scheme
             its edge over the fixed-offset baselines at odd counts.
IDEAL        interference-free upper bound.
PI_FOC       fixed offset of pi between adjacent elements.
UNIFORM_FOC  fixed offset of one turn / element count per side.
FPA          fixed half-wavelength arrays, Monte Carlo averaged.

CSV schema
----------
One row per (swept value, algorithm):
swept_param, value, algorithm, mean_sum_se, stderr_sum_se, mean_r_p,
mean_r_s, mean_p_st, drops_ok, drops_failed.  A JSON sidecar
(<out>.meta.json) records the resolved base configuration, the sweep
definition, and the seed.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import fpa_evaluate, foc_ic_solution, ideal_components
from .errors import PacrError
from .model import SystemConfig, Vec3
from .montecarlo import substream
from .optimizer import CancelMode, three_stage

ALGORITHMS = ("PROPOSED", "IDEAL", "PI_FOC", "UNIFORM_FOC", "FPA")

SWEEP_PARAMETERS = {
    "pt_st_distance": "waveguide_separation",
    "n_primary": "pa_count_primary",
    "m_secondary": "pa_count_secondary",
    "waveguide_length": "waveguide_length",
    "power_pt": "power_pt",
    "power_st": "power_st_max",
}

CSV_HEADER = ("swept_param", "value", "algorithm", "mean_sum_se",
              "stderr_sum_se", "mean_r_p", "mean_r_s", "mean_p_st",
              "drops_ok", "drops_failed")


@dataclass
class SweepSpec:
    swept_parameter: str
    values: list
    drops_per_point: int
    algorithms: tuple[str, ...]
    base_config: SystemConfig
    seed: int
    fpa_samples: int = 1000

    def __post_init__(self):
        if self.swept_parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"swept_parameter must be one of {sorted(SWEEP_PARAMETERS)}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if self.drops_per_point < 1:
            raise ValueError("drops_per_point must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


@dataclass
class DropResult:
    """All algorithms' metrics for one user placement.

    Dict values are keyed by algorithm name; a failed algorithm records
    NaNs plus the failure reason in ``errors``.
    """

    drop_index: int
    pu: Vec3
    su: Vec3
    sum_se: dict = field(default_factory=dict)
    r_p: dict = field(default_factory=dict)
    r_s: dict = field(default_factory=dict)
    p_st: dict = field(default_factory=dict)
    max_residual_mismatch: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)


def random_user_drop(config: SystemConfig,
                     rng: np.random.Generator) -> tuple[Vec3, Vec3]:
    """One uniform placement of PU and SU in their ground strips.

    Draw order is fixed (x_p, x_s, y_p, y_s) so drops are reproducible.
    """
    lx = config.waveguide_length
    half = config.user_region_width / 2.0
    x_p = rng.uniform(0.0, lx)
    x_s = rng.uniform(0.0, lx)
    y_p = rng.uniform(config.waveguide_y("PT") - half,
                      config.waveguide_y("PT") + half)
    y_s = rng.uniform(config.waveguide_y("ST") - half,
                      config.waveguide_y("ST") + half)
    return Vec3(x_p, y_p, 0.0), Vec3(x_s, y_s, 0.0)


def _record(result: DropResult, name: str, sum_se, r_p, r_s, p_st,
            mismatch=float("nan")):
    result.sum_se[name] = sum_se
    result.r_p[name] = r_p
    result.r_s[name] = r_s
    result.p_st[name] = p_st
    result.max_residual_mismatch[name] = mismatch


def _record_failure(result: DropResult, name: str, exc: Exception):
    nan = float("nan")
    _record(result, name, nan, nan, nan, nan)
    result.errors[name] = f"{type(exc).__name__}: {exc}"


def run_scenario(pu: Vec3, su: Vec3, algorithms, config: SystemConfig,
                 seed: int, fpa_samples: int = 1000,
                 drop_index: int = 0) -> DropResult:
    """Evaluate the requested algorithms on one fixed drop.

    Algorithm failures are recorded, never raised, so a sweep survives
    infeasible corner cases.  The FPA channel stream depends only on
    (seed, drop_index), keeping it common across algorithm subsets and
    swept values.
    """
    result = DropResult(drop_index=drop_index, pu=pu, su=su)
    for name in algorithms:
        try:
            if name == "PROPOSED":
                sol = three_stage(pu, su, config, CancelMode.EXACT_CANCEL)
                mism = max((r.residual_mismatch for r in sol.search_trace),
                           default=0.0)
                _record(result, name, sol.report.sum_se, sol.report.ase_pu,
                        sol.report.ase_su, sol.p_st, mism)
            elif name == "IDEAL":
                r_p, r_s = ideal_components(pu, su, config)
                _record(result, name, r_p + r_s, r_p, r_s,
                        config.power_st_max)
            elif name == "PI_FOC":
                sol = foc_ic_solution(math.pi, pu, su, config)
                mism = max((r.residual_mismatch for r in sol.search_trace),
                           default=0.0)
                _record(result, name, sol.report.sum_se, sol.report.ase_pu,
                        sol.report.ase_su, sol.p_st, mism)
            elif name == "UNIFORM_FOC":
                sol = foc_ic_solution(None, pu, su, config)
                mism = max((r.residual_mismatch for r in sol.search_trace),
                           default=0.0)
                _record(result, name, sol.report.sum_se, sol.report.ase_pu,
                        sol.report.ase_su, sol.p_st, mism)
            elif name == "FPA":
                fpa_rng = substream(seed, drop_index, 4)
                r_p, r_s, tx = fpa_evaluate(pu, su, config, fpa_samples,
                                            fpa_rng)
                _record(result, name, r_p + r_s, r_p, r_s, tx)
            else:
                raise ValueError(f"unknown algorithm {name!r}")
        except PacrError as exc:
            _record_failure(result, name, exc)
    return result


def _apply_value(config: SystemConfig, parameter: str, value) -> SystemConfig:
    field_name = SWEEP_PARAMETERS[parameter]
    if field_name.startswith("pa_count"):
        value = int(value)
    else:
        value = float(value)
    return dataclasses.replace(config, **{field_name: value})


def sweep(spec: SweepSpec, return_drops: bool = False):
    """Run the sweep and aggregate per (value, algorithm).

    Returns a list of row dicts matching ``CSV_HEADER``; with
    ``return_drops`` also returns {value: [DropResult, ...]}.
    """
    rows = []
    drops_by_value = {}
    for value in spec.values:
        config = _apply_value(spec.base_config, spec.swept_parameter, value)
        drops = []
        for drop_index in range(spec.drops_per_point):
            # Streams depend on (seed, drop_index) only, not on the swept
            # value, so drop j shares its randomness across values.
            rng = substream(spec.seed, drop_index)
            pu, su = random_user_drop(config, rng)
            drops.append(run_scenario(pu, su, spec.algorithms, config,
                                      seed=spec.seed,
                                      fpa_samples=spec.fpa_samples,
                                      drop_index=drop_index))
        drops_by_value[value] = drops
        for name in spec.algorithms:
            sums = np.array([d.sum_se[name] for d in drops])
            ok = np.isfinite(sums)
            n_ok = int(ok.sum())
            row = {
                "swept_param": spec.swept_parameter,
                "value": value,
                "algorithm": name,
                "drops_ok": n_ok,
                "drops_failed": len(drops) - n_ok,
            }
            if n_ok:
                good = sums[ok]
                row["mean_sum_se"] = float(good.mean())
                row["stderr_sum_se"] = (
                    float(good.std(ddof=1) / math.sqrt(n_ok))
                    if n_ok > 1 else 0.0)
                row["mean_r_p"] = float(np.array(
                    [d.r_p[name] for d in drops])[ok].mean())
                row["mean_r_s"] = float(np.array(
                    [d.r_s[name] for d in drops])[ok].mean())
                row["mean_p_st"] = float(np.array(
                    [d.p_st[name] for d in drops])[ok].mean())
            else:
                for key in ("mean_sum_se", "stderr_sum_se", "mean_r_p",
                            "mean_r_s", "mean_p_st"):
                    row[key] = float("nan")
            rows.append(row)
    if return_drops:
        return rows, drops_by_value
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def write_sweep_csv(rows, path, spec: SweepSpec | None = None) -> None:
    """Write aggregate rows as UTF-8 CSV plus a JSON metadata sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_format_cell(row[k]) for k in CSV_HEADER])
    if spec is not None:
        meta = {
            "seed": spec.seed,
            "swept_parameter": spec.swept_parameter,
            "values": list(spec.values),
            "drops_per_point": spec.drops_per_point,
            "algorithms": list(spec.algorithms),
            "fpa_samples": spec.fpa_samples,
            "base_config": _config_dict(spec.base_config),
        }
        with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _config_dict(config: SystemConfig) -> dict:
    data = dataclasses.asdict(config)
    data["deployment_region"] = list(config.region)
    return data
