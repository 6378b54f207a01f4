"""Three-stage placement and power optimization.

Stage 1 places the primary elements: a coarse step puts an equally spaced
grid (gap = half wavelength) centered on the intended user's x to minimize
aggregate path loss, then a wavelength-level refinement re-spaces
consecutive elements so their phases add coherently at the intended user
while approximating a destructive pattern at the unintended one.  Stage 2
repeats this for the secondary elements with the user roles swapped.
Stage 3 picks the secondary transmit power in closed form against the
interference cap.

The refinement works on linearized phases: for a gap anchored at x, a
displacement dx changes the phase at a user by roughly
2*pi*dx*(cos_factor/lambda + 1/lambda_g).  Requiring an integer number of
cycles k at the intended user and k + fraction cycles at the unintended
one gives one candidate step size per k on each side; an exhaustive scan
keeps the pair whose steps agree best and applies the intended-side step,
so coherence at the intended user is exact up to linearization error.

For an even element count the destructive fraction is 1/2 (anti-phase
pairs cancel exactly).  Odd counts cannot pair up; two rules are shipped:

* ``CancelMode.LITERAL`` - half-cycle gaps except a third-cycle on the two
  central gaps.  The implied unit-phasor target still has magnitude 1 for
  counts >= 5; kept for comparison against the fixed-offset baselines.
* ``CancelMode.EXACT_CANCEL`` - targets a phase table whose unit phasors
  sum exactly to zero: the central three elements at relative phases
  {0, 2pi/3, 4pi/3} and the remaining even number of elements in
  anti-phase pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InfeasibleRegionError, InfeasibleSearchError
from .model import (
    AseReport,
    PinchLayout,
    SystemConfig,
    Vec3,
    ase_report,
    average_channel_gain,
    derive_constants,
    lateral_offset_sq,
)


class CancelMode(Enum):
    """Destructive-combining rule used for odd element counts."""

    LITERAL = "literal"
    EXACT_CANCEL = "exact-cancel"


@dataclass(frozen=True)
class PhaseSearchResult:
    """Outcome of one integer phase-pair search over a single gap."""

    k_intended: int
    k_unintended: int
    delta_x: float             # m, step actually applied (intended side)
    residual_mismatch: float   # m, |intended step - unintended step|


@dataclass
class Solution:
    """Layouts, power, closed-form report, and the per-gap search trace.

    ``search_trace`` lists primary gaps first (count N-1) followed by
    secondary gaps (count M-1).
    """

    layout_pt: PinchLayout
    layout_st: PinchLayout
    p_st: float
    report: AseReport
    search_trace: list[PhaseSearchResult]


def coarse_placement(x_target: float, count: int, role: str,
                     config: SystemConfig) -> PinchLayout:
    """Equally spaced elements at minimum spacing, centered on the target.

    Symmetric offsets about the target minimize the aggregate path-loss
    objective for any count parity (each term is even and strictly convex
    in its offset).  A layout that would poke out of the deployment region
    is translated just enough to fit.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    consts = derive_constants(config)
    spacing = consts.min_spacing
    lo, hi = config.region
    if count * spacing > hi - lo:
        raise InfeasibleRegionError(
            f"{count} elements at spacing {spacing:.4e} m exceed the "
            f"deployment region [{lo}, {hi}]")
    x1 = x_target - (count - 1) / 2.0 * spacing
    xs = x1 + spacing * np.arange(count)
    if xs[0] < lo:
        xs = xs + (lo - xs[0])
    elif xs[-1] > hi:
        xs = xs - (xs[-1] - hi)
    return PinchLayout(role=role, xs=tuple(float(x) for x in xs))


def _literal_fraction(count: int, gap_index: int) -> float:
    if count % 2 == 0:
        return 0.5
    central = ((count + 1) // 2, (count + 3) // 2)
    return 1.0 / 3.0 if gap_index in central else 0.5


def exact_cancel_targets(count: int) -> np.ndarray:
    """Zero-sum target phases (cycles) for an odd element count.

    Central triplet at {0, 1/3, 2/3} cycles; the remaining elements
    alternate 0 / 1/2 in order, pairing off in anti-phase.
    """
    if count < 3 or count % 2 == 0:
        raise ValueError("exact-cancel targets are defined for odd counts >= 3")
    left = (count - 3) // 2
    phases = np.empty(count)
    outer = list(range(left)) + list(range(left + 3, count))
    for j, idx in enumerate(outer):
        phases[idx] = 0.5 * (j % 2)
    phases[left:left + 3] = (0.0, 1.0 / 3.0, 2.0 / 3.0)
    return phases


def gap_fraction(count: int, gap_index: int, mode: CancelMode) -> float:
    """Fractional cycles required across one gap for destructive combining.

    ``gap_index`` is the 1-based index of the right element of the gap,
    so valid values run from 2 to ``count``.
    """
    if not 2 <= gap_index <= count:
        raise ValueError(f"gap_index must lie in [2, {count}], got {gap_index}")
    if count % 2 == 0 or mode is CancelMode.LITERAL:
        return _literal_fraction(count, gap_index)
    targets = exact_cancel_targets(count)
    return float((targets[gap_index - 1] - targets[gap_index - 2]) % 1.0)


def destructive_cycles(k: int, count: int, gap_index: int,
                       mode: CancelMode) -> float:
    """Total cycles (integer + fraction) targeted at the unintended user."""
    return k + gap_fraction(count, gap_index, mode)


def target_phases(count: int, mode: CancelMode) -> np.ndarray:
    """Cumulative unintended-user target phases implied by the gap rule,
    radians, first element at 0."""
    phases = np.zeros(count)
    for gap in range(2, count + 1):
        phases[gap - 1] = phases[gap - 2] \
            + 2.0 * math.pi * gap_fraction(count, gap, mode)
    return phases


def candidate_step(b_cycles, anchor_x: float, target: Vec3, role: str,
                   config: SystemConfig):
    """Displacement that advances the phase at ``target`` by ``b_cycles``.

    Linearized about the anchor:
        dx = b / (cos_factor/lambda + 1/lambda_g),
    where cos_factor = (anchor - x_target)/dist is the x direction cosine.
    Accepts a scalar or an array of cycle counts.
    """
    consts = derive_constants(config)
    offset = anchor_x - target.x
    dist = math.sqrt(offset * offset + lateral_offset_sq(target, role, config))
    denom = offset / dist / consts.wavelength + 1.0 / consts.guided_wavelength
    # 1/lambda_g > 1/lambda >= |cos|/lambda whenever the index exceeds 1.
    if denom <= 0.0:
        raise ArithmeticError(
            "non-positive step denominator; effective_index must exceed 1")
    return b_cycles / denom


def scan_gap(anchor_x: float, intended: Vec3, unintended: Vec3,
             fraction: float, role: str,
             config: SystemConfig) -> PhaseSearchResult:
    """Exhaustive integer scan for one gap's displacement.

    Scans k_int in [1, k_max] against k_unint in [0, k_max], where the
    unintended side targets k_unint + ``fraction`` cycles.  Intended-side
    candidates below the minimum spacing are discarded and the returned
    step is the intended-side one (coherence at the intended user takes
    priority).  Ties prefer the smaller k_int, then the smaller k_unint.
    """
    k_max = config.k_max
    consts = derive_constants(config)
    k_int = np.arange(1, k_max + 1, dtype=float)
    dx_int = candidate_step(k_int, anchor_x, intended, role, config)
    feasible = dx_int >= consts.min_spacing
    if not np.any(feasible):
        raise InfeasibleSearchError(
            f"no intended-side step >= {consts.min_spacing:.4e} m within "
            f"k_max = {k_max}")
    k_int = k_int[feasible]
    dx_int = dx_int[feasible]
    k_unint = np.arange(0, k_max + 1, dtype=float)
    dx_unint = candidate_step(k_unint + fraction, anchor_x, unintended,
                              role, config)
    gaps = np.abs(dx_int[:, None] - dx_unint[None, :])
    flat = int(np.argmin(gaps))  # first minimum = smallest k_int, then k_unint
    i, j = divmod(flat, dx_unint.size)
    return PhaseSearchResult(
        k_intended=int(k_int[i]),
        k_unintended=int(k_unint[j]),
        delta_x=float(dx_int[i]),
        residual_mismatch=float(gaps[i, j]),
    )


def phase_pair_search(anchor_x: float, intended: Vec3, unintended: Vec3,
                      count: int, gap_index: int, mode: CancelMode,
                      role: str, config: SystemConfig) -> PhaseSearchResult:
    """One gap's integer search with the mode's destructive fraction."""
    return scan_gap(anchor_x, intended, unintended,
                    gap_fraction(count, gap_index, mode), role, config)


def walk_layout(coarse: PinchLayout, config: SystemConfig,
                search_fn) -> tuple[PinchLayout, list[PhaseSearchResult]]:
    """Grow a layout rightward from its first element.

    ``search_fn(anchor_x, gap_index)`` supplies each gap's step.  If the
    result leaves the deployment region it is translated left; failure to
    fit raises.
    """
    xs = [coarse.xs[0]]
    trace: list[PhaseSearchResult] = []
    for gap_index in range(2, coarse.count + 1):
        result = search_fn(xs[-1], gap_index)
        trace.append(result)
        xs.append(xs[-1] + result.delta_x)
    arr = np.asarray(xs)
    lo, hi = config.region
    if arr[-1] > hi:
        arr = arr - (arr[-1] - hi)
    if arr[0] < lo:
        raise InfeasibleRegionError(
            f"refined span {arr[-1] - arr[0]:.4f} m does not fit the "
            f"deployment region [{lo}, {hi}]")
    layout = PinchLayout(role=coarse.role, xs=tuple(float(x) for x in arr))
    layout.validate(config)
    return layout, trace


def refine_layout_traced(coarse: PinchLayout, intended: Vec3, unintended: Vec3,
                         mode: CancelMode, config: SystemConfig,
                         ) -> tuple[PinchLayout, list[PhaseSearchResult]]:
    """Wavelength-level refinement plus the per-gap search trace."""
    def search(anchor_x: float, gap_index: int) -> PhaseSearchResult:
        return phase_pair_search(anchor_x, intended, unintended, coarse.count,
                                 gap_index, mode, coarse.role, config)

    return walk_layout(coarse, config, search)


def refine_layout(coarse: PinchLayout, intended: Vec3, unintended: Vec3,
                  mode: CancelMode, config: SystemConfig) -> PinchLayout:
    """Wavelength-level refinement of a coarse layout (see module docs)."""
    layout, _ = refine_layout_traced(coarse, intended, unintended, mode, config)
    return layout


def power_control(gain_pu_st: float, config: SystemConfig) -> float:
    """Closed-form secondary power: the largest value meeting the
    interference cap, clipped to the power budget."""
    if gain_pu_st < 0:
        raise ValueError("channel gain cannot be negative")
    if gain_pu_st == 0.0:
        return config.power_st_max
    cap = config.pa_count_secondary * config.interference_threshold / gain_pu_st
    return min(config.power_st_max, cap)


def three_stage(pu: Vec3, su: Vec3, config: SystemConfig,
                mode: CancelMode = CancelMode.LITERAL) -> Solution:
    """Full pipeline: primary placement, secondary placement, power."""
    coarse_pt = coarse_placement(pu.x, config.pa_count_primary, "PT", config)
    layout_pt, trace_pt = refine_layout_traced(coarse_pt, pu, su, mode, config)

    coarse_st = coarse_placement(su.x, config.pa_count_secondary, "ST", config)
    layout_st, trace_st = refine_layout_traced(coarse_st, su, pu, mode, config)

    p_st = power_control(average_channel_gain(layout_st, pu, config), config)
    report = ase_report(layout_pt, layout_st, p_st, pu, su, config)
    return Solution(
        layout_pt=layout_pt,
        layout_st=layout_st,
        p_st=p_st,
        report=report,
        search_trace=trace_pt + trace_st,
    )


def residual_phasor_sum(phases) -> tuple[float, complex]:
    """Magnitude and value of sum_n exp(j * phases[n])."""
    arr = np.asarray(phases, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one phase")
    total = complex(np.exp(1j * arr).sum())
    return abs(total), total
