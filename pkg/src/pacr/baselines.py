"""Benchmark schemes the optimized pipeline is compared against.

* Ideal case: constructive alignment only, cross-interference forced to
  zero; an upper bound on what interference management could achieve.
* Fixed-offset interference cancellation (FOC-IC): the same pipeline but
  with one constant phase fraction per gap (pi, or one full turn divided
  by the element count).
* Fixed-position antennas (FPA): a conventional half-wavelength array at
  each feed point; the primary side uses maximum-ratio transmission and
  the secondary side solves a small quadratically constrained program,
  evaluated by Monte Carlo over instantaneous channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateChannelError
from .model import (
    PinchLayout,
    SystemConfig,
    Vec3,
    ase_report,
    average_channel_gain,
    derive_constants,
)
from .optimizer import (
    PhaseSearchResult,
    Solution,
    candidate_step,
    coarse_placement,
    power_control,
    scan_gap,
    walk_layout,
)


@dataclass
class FixedArrayChannel:
    """One instantaneous channel draw for the fixed-array benchmark."""

    h_pt_to_pu: np.ndarray
    h_pt_to_su: np.ndarray
    h_st_to_pu: np.ndarray
    h_st_to_su: np.ndarray
    positions_pt: np.ndarray  # (N, 3) element coordinates
    positions_st: np.ndarray  # (M, 3)


@dataclass
class Beamformer:
    weights: np.ndarray

    @property
    def power(self) -> float:
        return float(np.vdot(self.weights, self.weights).real)


def _aligned_refine(coarse: PinchLayout, intended: Vec3,
                    config: SystemConfig) -> PinchLayout:
    """Pure constructive refinement: the smallest whole-cycle step per gap
    that respects the minimum spacing."""
    consts = derive_constants(config)

    def search(anchor_x: float, gap_index: int) -> PhaseSearchResult:
        k = 1
        dx = candidate_step(float(k), anchor_x, intended, coarse.role, config)
        while dx < consts.min_spacing:
            k += 1
            dx = candidate_step(float(k), anchor_x, intended, coarse.role,
                                config)
        return PhaseSearchResult(k_intended=k, k_unintended=0,
                                 delta_x=float(dx), residual_mismatch=0.0)

    layout, _ = walk_layout(coarse, config, search)
    return layout


def ideal_components(pu: Vec3, su: Vec3,
                     config: SystemConfig) -> tuple[float, float]:
    """(R_p, R_s) of the interference-free upper bound."""
    n = config.pa_count_primary
    m = config.pa_count_secondary
    sigma2 = config.noise_power
    layout_pt = _aligned_refine(
        coarse_placement(pu.x, n, "PT", config), pu, config)
    layout_st = _aligned_refine(
        coarse_placement(su.x, m, "ST", config), su, config)
    gain_p = average_channel_gain(layout_pt, pu, config)
    gain_s = average_channel_gain(layout_st, su, config)
    # Zero cross-interference leaves the cap slack, so the full budget runs.
    r_p = math.log2(1.0 + config.power_pt * gain_p / (n * sigma2))
    r_s = math.log2(1.0 + config.power_st_max * gain_s / (m * sigma2))
    return r_p, r_s


def ideal_sum_se(pu: Vec3, su: Vec3, config: SystemConfig) -> float:
    """Sum SE with interference artificially suppressed to zero."""
    r_p, r_s = ideal_components(pu, su, config)
    return r_p + r_s


def foc_ic_solution(theta_fix: float | None, pu: Vec3, su: Vec3,
                    config: SystemConfig) -> Solution:
    """Three-stage pipeline with a constant per-gap phase offset.

    ``theta_fix`` is the offset in radians applied on both sides (pi for
    the anti-phase variant).  Passing None selects one full turn divided
    by the element count of each side, which spreads that side's unit
    phasors uniformly around the circle.
    """
    def run_side(x_target, count, role, intended, unintended):
        fraction = theta_fix / (2.0 * math.pi) if theta_fix is not None \
            else 1.0 / count
        coarse = coarse_placement(x_target, count, role, config)

        def search(anchor_x, gap_index):
            return scan_gap(anchor_x, intended, unintended, fraction, role,
                            config)

        return walk_layout(coarse, config, search)

    layout_pt, trace_pt = run_side(pu.x, config.pa_count_primary, "PT", pu, su)
    layout_st, trace_st = run_side(su.x, config.pa_count_secondary, "ST", su, pu)
    p_st = power_control(average_channel_gain(layout_st, pu, config), config)
    report = ase_report(layout_pt, layout_st, p_st, pu, su, config)
    return Solution(layout_pt=layout_pt, layout_st=layout_st, p_st=p_st,
                    report=report, search_trace=trace_pt + trace_st)


def _ula_positions(count: int, feed_x: float, y: float, z: float,
                   spacing: float) -> np.ndarray:
    offsets = (np.arange(count) - (count - 1) / 2.0) * spacing
    pos = np.empty((count, 3))
    pos[:, 0] = feed_x + offsets
    pos[:, 1] = y
    pos[:, 2] = z
    return pos


def _ricean_vector(positions: np.ndarray, user: Vec3, config: SystemConfig,
                   rng: np.random.Generator) -> np.ndarray:
    consts = derive_constants(config)
    kappa = config.ricean_factor
    d = np.linalg.norm(positions - user.asarray(), axis=1)
    amp = np.sqrt(consts.reference_gain
                  / ((kappa + 1.0) * d ** config.pathloss_exponent))
    los = np.exp(-2j * np.pi * d / consts.wavelength)
    tilde = (rng.standard_normal(d.size)
             + 1j * rng.standard_normal(d.size)) / np.sqrt(2.0)
    return amp * (np.sqrt(kappa) * los + tilde)


def fpa_channels(pu: Vec3, su: Vec3, config: SystemConfig,
                 rng: np.random.Generator) -> FixedArrayChannel:
    """Half-wavelength uniform linear arrays centered at each feed point,
    with one Ricean draw per element-to-user link."""
    consts = derive_constants(config)
    pos_pt = _ula_positions(config.pa_count_primary, config.feed_x_pt,
                            config.waveguide_y("PT"), config.waveguide_height,
                            consts.wavelength / 2.0)
    pos_st = _ula_positions(config.pa_count_secondary, config.feed_x_st,
                            config.waveguide_y("ST"), config.waveguide_height,
                            consts.wavelength / 2.0)
    return FixedArrayChannel(
        h_pt_to_pu=_ricean_vector(pos_pt, pu, config, rng),
        h_pt_to_su=_ricean_vector(pos_pt, su, config, rng),
        h_st_to_pu=_ricean_vector(pos_st, pu, config, rng),
        h_st_to_su=_ricean_vector(pos_st, su, config, rng),
        positions_pt=pos_pt,
        positions_st=pos_st,
    )


def fpa_mrt(h: np.ndarray, power: float) -> Beamformer:
    """Maximum-ratio transmission at the given power."""
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise DegenerateChannelError("cannot beamform on a zero channel")
    return Beamformer(weights=np.sqrt(power) * h / norm)


def fpa_st_beamformer(h_ss: np.ndarray, h_sp: np.ndarray, power: float,
                      interference_cap: float) -> Beamformer:
    """Maximize |h_ss^H w|^2 subject to ||w||^2 <= power and
    |h_sp^H w|^2 <= interference_cap.

    If plain MRT meets the cap it is optimal.  Otherwise the optimum lies
    in span{h_ss, h_sp} with the cap tight: writing w = a*u_perp + b*u_par
    (u_par along h_sp, u_perp the orthonormalized remainder of h_ss), |b|
    is pinned by the cap, phases align with h_ss, and the magnitude split
    is settled by a bounded scalar search.
    """
    norm_ss = np.linalg.norm(h_ss)
    if norm_ss == 0.0:
        raise DegenerateChannelError("cannot beamform on a zero channel")
    mrt = fpa_mrt(h_ss, power)
    if abs(np.vdot(h_sp, mrt.weights)) ** 2 <= interference_cap:
        return mrt

    norm_sp = np.linalg.norm(h_sp)
    u_par = h_sp / norm_sp
    residual = h_ss - u_par * np.vdot(u_par, h_ss)
    alpha = float(np.linalg.norm(residual))  # real >= 0 by construction
    beta = complex(np.vdot(u_par, h_ss))
    r_cap = min(math.sqrt(interference_cap) / norm_sp, math.sqrt(power))

    if alpha < 1e-14 * norm_ss:
        # Collinear channels: all useful gain flows through the capped
        # direction, so just fill it up to the cap.
        w = r_cap * np.exp(1j * np.angle(beta)) * u_par
        return Beamformer(weights=w)

    u_perp = residual / alpha

    def gain(r: float) -> float:
        return alpha * math.sqrt(max(power - r * r, 0.0)) + abs(beta) * r

    best = minimize_scalar(lambda r: -gain(r), bounds=(0.0, r_cap),
                           method="bounded", options={"xatol": 1e-10})
    r_star = max((r_cap, float(best.x)), key=gain)
    a = math.sqrt(max(power - r_star * r_star, 0.0))
    w = a * u_perp + r_star * np.exp(1j * np.angle(beta)) * u_par
    return Beamformer(weights=w)


def fpa_evaluate(pu: Vec3, su: Vec3, config: SystemConfig, n_samples: int,
                 seed) -> tuple[float, float, float]:
    """(mean R_p, mean R_s, mean ST transmit power) over channel draws.

    Beamformers are recomputed per realization: the primary side always
    uses MRT at full budget, the secondary side solves the capped program
    against that draw's interference channel.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    rng = np.random.default_rng(seed)
    sigma2 = config.noise_power
    r_p = np.empty(n_samples)
    r_s = np.empty(n_samples)
    tx = np.empty(n_samples)
    for i in range(n_samples):
        ch = fpa_channels(pu, su, config, rng)
        w_pt = fpa_mrt(ch.h_pt_to_pu, config.power_pt)
        w_st = fpa_st_beamformer(ch.h_st_to_su, ch.h_st_to_pu,
                                 config.power_st_max,
                                 config.interference_threshold)
        sig_p = abs(np.vdot(ch.h_pt_to_pu, w_pt.weights)) ** 2
        cross_p = abs(np.vdot(ch.h_st_to_pu, w_st.weights)) ** 2
        sig_s = abs(np.vdot(ch.h_st_to_su, w_st.weights)) ** 2
        cross_s = abs(np.vdot(ch.h_pt_to_su, w_pt.weights)) ** 2
        r_p[i] = math.log2(1.0 + sig_p / (cross_p + sigma2))
        r_s[i] = math.log2(1.0 + sig_s / (cross_s + sigma2))
        tx[i] = w_st.power
    return float(r_p.mean()), float(r_s.mean()), float(tx.mean())


def fpa_sum_se(pu: Vec3, su: Vec3, config: SystemConfig,
               n_samples: int, seed) -> float:
    """Monte Carlo average sum SE of the fixed-array benchmark."""
    r_p, r_s, _ = fpa_evaluate(pu, su, config, n_samples, seed)
    return r_p + r_s
