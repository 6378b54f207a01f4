"""Monte Carlo sampling of Ricean channel realizations.

This is the empirical oracle for every closed form in :mod:`pacr.model`:
sampled averages of the combined channel gain and of log2(1 + SINR) are
compared against the analytic expressions.

RNG contract
------------
Every public estimator takes an explicit integer seed and builds a fresh
``numpy.random.Generator`` (PCG64) from it, so results are a bit-exact
function of (seed, n_samples, config) and independent of anything global.
Complex Gaussians are drawn as ``(standard_normal + 1j*standard_normal) /
sqrt(2)``, link by link in the documented order; sums use numpy's fixed
left-to-right reduction.  Substreams for independent workers or drops are
derived with ``substream(seed, *indices)`` (a SeedSequence spawn key),
never by reusing a generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    PinchLayout,
    SystemConfig,
    Vec3,
    derive_constants,
    element_distances,
)


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for (seed, index...) worker or drop streams."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(indices))
    return np.random.default_rng(ss)


@dataclass
class ChannelRealization:
    """One sampled set of element-to-user channels and in-waveguide phases."""

    h_pt_to_pu: np.ndarray  # (N,) complex
    h_pt_to_su: np.ndarray  # (N,) complex
    h_st_to_pu: np.ndarray  # (M,) complex
    h_st_to_su: np.ndarray  # (M,) complex
    g_pt: np.ndarray        # (N,) unit-modulus complex
    g_st: np.ndarray        # (M,) unit-modulus complex


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    sample_count: int


def _guided_phasors(layout: PinchLayout, config: SystemConfig) -> np.ndarray:
    consts = derive_constants(config)
    xs = layout.x_array()
    phase = 2.0 * np.pi / consts.guided_wavelength \
        * np.abs(xs - config.feed_x(layout.role))
    return np.exp(-1j * phase)


def _link_parts(layout: PinchLayout, user: Vec3, config: SystemConfig):
    """Amplitude scale and LoS phasor of each element-to-user link."""
    consts = derive_constants(config)
    kappa = config.ricean_factor
    d = element_distances(layout, user, config)
    amp = np.sqrt(consts.reference_gain
                  / ((kappa + 1.0) * d ** config.pathloss_exponent))
    los = np.exp(-2j * np.pi * d / consts.wavelength)
    return amp, los


def _draw_diffuse(rng: np.random.Generator, shape) -> np.ndarray:
    # CN(0, 1): unit-variance circularly symmetric complex Gaussian.
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def _sample_link(layout, user, config, rng, n_samples: int) -> np.ndarray:
    amp, los = _link_parts(layout, user, config)
    kappa = config.ricean_factor
    tilde = _draw_diffuse(rng, (n_samples, layout.count))
    return amp * (np.sqrt(kappa) * los + tilde)


def sample_realization(layout_pt: PinchLayout, layout_st: PinchLayout,
                       pu: Vec3, su: Vec3, config: SystemConfig,
                       rng: np.random.Generator) -> ChannelRealization:
    """Draw one Ricean realization of all four transmitter-user links.

    Diffuse terms are drawn in the fixed order PT->PU, PT->SU, ST->PU,
    ST->SU so realizations are reproducible for a given generator state.
    """
    layout_pt.validate(config)
    layout_st.validate(config)
    links = []
    for layout, user in ((layout_pt, pu), (layout_pt, su),
                         (layout_st, pu), (layout_st, su)):
        links.append(_sample_link(layout, user, config, rng, 1)[0])
    return ChannelRealization(
        h_pt_to_pu=links[0],
        h_pt_to_su=links[1],
        h_st_to_pu=links[2],
        h_st_to_su=links[3],
        g_pt=_guided_phasors(layout_pt, config),
        g_st=_guided_phasors(layout_st, config),
    )


def mc_channel_gain(layout: PinchLayout, user: Vec3, config: SystemConfig,
                    n_samples: int, seed: int) -> McEstimate:
    """Empirical mean of |sum_t h_t g_t|^2 with its standard error."""
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    layout.validate(config)
    rng = np.random.default_rng(seed)
    h = _sample_link(layout, user, config, rng, n_samples)
    combined = (h * _guided_phasors(layout, config)).sum(axis=1)
    values = np.abs(combined) ** 2
    return McEstimate(
        mean=float(values.mean()),
        std_error=float(values.std(ddof=1) / np.sqrt(n_samples)),
        sample_count=n_samples,
    )


def mc_ase(layout_pt: PinchLayout, layout_st: PinchLayout, p_st: float,
           pu: Vec3, su: Vec3, config: SystemConfig,
           n_samples: int, seed: int) -> tuple[McEstimate, McEstimate, McEstimate]:
    """Sampled average SEs of PU and SU plus mean interference at the PU.

    Returns (R_p estimate, R_s estimate, interference estimate); the draw
    order matches :func:`sample_realization`, vectorized across samples.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    layout_pt.validate(config)
    layout_st.validate(config)
    rng = np.random.default_rng(seed)
    h_pt_pu = _sample_link(layout_pt, pu, config, rng, n_samples)
    h_pt_su = _sample_link(layout_pt, su, config, rng, n_samples)
    h_st_pu = _sample_link(layout_st, pu, config, rng, n_samples)
    h_st_su = _sample_link(layout_st, su, config, rng, n_samples)
    g_pt = _guided_phasors(layout_pt, config)
    g_st = _guided_phasors(layout_st, config)

    n = config.pa_count_primary
    m = config.pa_count_secondary
    sigma2 = config.noise_power
    sig_p = np.abs((h_pt_pu * g_pt).sum(axis=1)) ** 2
    cross_p = np.abs((h_st_pu * g_st).sum(axis=1)) ** 2
    sig_s = np.abs((h_st_su * g_st).sum(axis=1)) ** 2
    cross_s = np.abs((h_pt_su * g_pt).sum(axis=1)) ** 2

    r_p = np.log2(1.0 + (config.power_pt / n * sig_p)
                  / (p_st / m * cross_p + sigma2))
    r_s = np.log2(1.0 + (p_st / m * sig_s)
                  / (config.power_pt / n * cross_s + sigma2))
    interference = p_st / m * cross_p

    def estimate(values: np.ndarray) -> McEstimate:
        return McEstimate(
            mean=float(values.mean()),
            std_error=float(values.std(ddof=1) / np.sqrt(n_samples)),
            sample_count=n_samples,
        )

    return estimate(r_p), estimate(r_s), estimate(interference)
