"""Geometry, Ricean channel statistics, and closed-form average-SE math.

Two waveguide-fed transmitters (PT for the primary network, ST for the
secondary one) run parallel to the x axis at height ``waveguide_height``,
offset by ``+-waveguide_separation/2`` along y.  Radiating elements are
activated at chosen x positions along each waveguide; a signal picks up an
in-waveguide phase from the feed to the element plus a free-space phase
from the element to the user.  Per-element channels are Ricean: a
deterministic line-of-sight phasor plus a circularly symmetric complex
Gaussian diffuse term, scaled by power-law path loss.

Everything here is a pure function of its inputs (watts, meters, Hz
throughout), so concurrent use needs no locking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularityError

PT = "PT"
ST = "ST"
ROLES = (PT, ST)

# Below this user-to-element distance the power-law model diverges; reject.
MIN_USER_DISTANCE = 1e-6
# Slack applied when checking consecutive element gaps against the minimum.
SPACING_TOLERANCE = 1e-12


def dbm_to_watts(level_dbm: float) -> float:
    return 1e-3 * 10.0 ** (level_dbm / 10.0)


def watts_to_dbm(power_w: float) -> float:
    return 10.0 * math.log10(power_w / 1e-3)


@dataclass(frozen=True)
class Vec3:
    """A point in the 3D Cartesian deployment space, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate in {self!r}")

    def asarray(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SystemConfig:
    """All physical and protocol parameters of one scenario.

    Powers are stored in watts (converters above handle dBm).  The
    deployment region defaults to the full waveguide span [0, Lx] when
    left as None.
    """

    carrier_frequency: float = 28e9       # Hz
    light_speed: float = 3e8              # m/s, exact by convention
    effective_index: float = 1.4          # in-waveguide refractive index
    ricean_factor: float = 4.0            # LoS-to-diffuse power ratio
    pathloss_exponent: float = 2.2
    waveguide_length: float = 15.0        # m
    waveguide_height: float = 3.0         # m
    waveguide_separation: float = 12.0    # m, PT at -d/2, ST at +d/2
    feed_x_pt: float = 0.0                # m
    feed_x_st: float = 0.0                # m
    pa_count_primary: int = 5
    pa_count_secondary: int = 5
    power_pt: float = 1e-3                # W (0 dBm)
    power_st_max: float = 1e-3            # W (0 dBm)
    interference_threshold: float = 1e-10  # W (-70 dBm)
    noise_power: float = 1e-12            # W (-90 dBm)
    user_region_width: float = 10.0       # m, along y around each waveguide
    k_max: int = 3                        # integer bound of the phase search
    deployment_region: tuple[float, float] | None = None

    def __post_init__(self):
        if self.carrier_frequency <= 0:
            raise ConfigError("carrier_frequency must be positive")
        if self.light_speed <= 0:
            raise ConfigError("light_speed must be positive")
        if self.effective_index < 1.0:
            raise ConfigError("effective_index must be >= 1")
        if self.ricean_factor < 0:
            raise ConfigError("ricean_factor must be >= 0")
        if self.pathloss_exponent < 2.0:
            raise ConfigError("pathloss_exponent must be >= 2")
        if self.waveguide_length <= 0:
            raise ConfigError("waveguide_length must be positive")
        if self.waveguide_height <= 0:
            raise ConfigError("waveguide_height must be positive")
        if self.waveguide_separation <= 0:
            raise ConfigError("waveguide_separation must be positive")
        for name in ("power_pt", "power_st_max", "interference_threshold",
                     "noise_power"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.pa_count_primary < 1 or self.pa_count_secondary < 1:
            raise ConfigError("element counts must be >= 1")
        if self.user_region_width < 0:
            raise ConfigError("user_region_width must be >= 0")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.deployment_region is not None:
            lo, hi = self.deployment_region
            if not (0.0 <= lo < hi <= self.waveguide_length):
                raise ConfigError(
                    "deployment_region must be a nonempty subinterval of "
                    f"[0, {self.waveguide_length}]")

    @property
    def region(self) -> tuple[float, float]:
        if self.deployment_region is None:
            return (0.0, self.waveguide_length)
        return self.deployment_region

    def waveguide_y(self, role: str) -> float:
        _check_role(role)
        half = self.waveguide_separation / 2.0
        return -half if role == PT else half

    def feed_x(self, role: str) -> float:
        _check_role(role)
        return self.feed_x_pt if role == PT else self.feed_x_st

    def pa_count(self, role: str) -> int:
        _check_role(role)
        return self.pa_count_primary if role == PT else self.pa_count_secondary


def _check_role(role: str) -> None:
    if role not in ROLES:
        raise ValueError(f"transmitter role must be one of {ROLES}, got {role!r}")


@dataclass(frozen=True)
class DerivedConstants:
    """Quantities derived from the carrier and waveguide material."""

    wavelength: float          # free-space lambda, m
    guided_wavelength: float   # lambda / effective_index, m
    reference_gain: float      # channel power gain at 1 m, dimensionless*m^2
    min_spacing: float         # half-wavelength anti-coupling spacing, m


def derive_constants(config: SystemConfig) -> DerivedConstants:
    """Wavelengths, reference gain, and the minimum element spacing."""
    if config.carrier_frequency <= 0 or config.effective_index < 1.0:
        raise ConfigError("need carrier_frequency > 0 and effective_index >= 1")
    wavelength = config.light_speed / config.carrier_frequency
    return DerivedConstants(
        wavelength=wavelength,
        guided_wavelength=wavelength / config.effective_index,
        reference_gain=wavelength ** 2 / (16.0 * math.pi ** 2),
        min_spacing=wavelength / 2.0,
    )


@dataclass(frozen=True, eq=False)
class PinchLayout:
    """Ordered x coordinates of the active elements on one waveguide."""

    role: str
    xs: tuple[float, ...]

    def __post_init__(self):
        _check_role(self.role)
        if len(self.xs) < 1:
            raise ValueError("a layout needs at least one element")

    @property
    def count(self) -> int:
        return len(self.xs)

    def x_array(self) -> np.ndarray:
        return np.asarray(self.xs, dtype=float)

    def validate(self, config: SystemConfig) -> None:
        """Check spacing and region invariants against a configuration."""
        consts = derive_constants(config)
        xs = self.x_array()
        gaps = np.diff(xs)
        if np.any(gaps <= 0):
            raise ValueError("element x coordinates must be strictly increasing")
        if np.any(gaps < consts.min_spacing - SPACING_TOLERANCE):
            raise ValueError(
                f"element gap {gaps.min():.6e} m below minimum spacing "
                f"{consts.min_spacing:.6e} m")
        lo, hi = config.region
        if xs[0] < lo - SPACING_TOLERANCE or xs[-1] > hi + SPACING_TOLERANCE:
            raise ValueError(
                f"layout [{xs[0]:.6f}, {xs[-1]:.6f}] leaves deployment "
                f"region [{lo}, {hi}]")


@dataclass(frozen=True)
class AseReport:
    """Closed-form average spectral efficiencies for one configuration.

    Gains are the expected squared magnitudes of the combined per-element
    channels, indexed as gain_<user>_<transmitter>.
    """

    ase_pu: float            # bits/s/Hz
    ase_su: float            # bits/s/Hz
    sum_se: float            # ase_pu + ase_su
    gain_pu_pt: float
    gain_pu_st: float
    gain_su_pt: float
    gain_su_st: float
    interference_pu: float   # W, expected interference power at the PU
    p_st: float              # W, secondary transmit power used


def guided_phase(x_pa: float, x_feed: float, guided_wavelength: float) -> float:
    """In-waveguide phase accumulated from the feed to an element, radians."""
    return 2.0 * math.pi * abs(x_pa - x_feed) / guided_wavelength


def cumulative_phase(x_pa: float, user: Vec3, role: str,
                     config: SystemConfig) -> float:
    """Total feed-to-user phase through one element, radians.

    Free-space leg plus in-waveguide leg; the waveguide term is signed in
    the element-minus-feed direction, matching the step-size algebra used
    by the wavelength-level refinement.
    """
    consts = derive_constants(config)
    lateral = lateral_offset_sq(user, role, config)
    free = math.sqrt((x_pa - user.x) ** 2 + lateral)
    return (2.0 * math.pi / consts.wavelength * free
            + 2.0 * math.pi / consts.guided_wavelength
            * (x_pa - config.feed_x(role)))


def lateral_offset_sq(user: Vec3, role: str, config: SystemConfig) -> float:
    """Squared y/z distance between a user and a transmitter's waveguide."""
    dy = config.waveguide_y(role) - user.y
    dz = config.waveguide_height - user.z
    return dy * dy + dz * dz


def element_distances(layout: PinchLayout, user: Vec3,
                      config: SystemConfig) -> np.ndarray:
    """Exact element-to-user distances, with the singularity guard."""
    xs = layout.x_array()
    d = np.sqrt((xs - user.x) ** 2 + lateral_offset_sq(user, layout.role, config))
    if np.any(d < MIN_USER_DISTANCE):
        raise SingularityError(
            f"user {user} within {MIN_USER_DISTANCE} m of an element")
    return d


def link_phases(layout: PinchLayout, user: Vec3,
                config: SystemConfig) -> np.ndarray:
    """Per-element total phase (free-space + in-waveguide legs), radians.

    Uses the feed-distance (norm) form of the waveguide leg so it matches
    the sampled channel exactly for any feed position.
    """
    consts = derive_constants(config)
    xs = layout.x_array()
    d = element_distances(layout, user, config)
    return (2.0 * math.pi / consts.wavelength * d
            + 2.0 * math.pi / consts.guided_wavelength
            * np.abs(xs - config.feed_x(layout.role)))


def average_channel_gain(layout: PinchLayout, user: Vec3,
                         config: SystemConfig) -> float:
    """Expected squared magnitude of the coherently combined channels.

    E|sum_t h_t g_t|^2 in closed form: the LoS phasors add coherently and
    the diffuse powers add incoherently,

        gain = eta/(kappa+1) * (kappa * |sum_t e^{-j phi_t} / d_t^{chi/2}|^2
                                + sum_t d_t^{-chi}).
    """
    layout.validate(config)
    consts = derive_constants(config)
    kappa = config.ricean_factor
    chi = config.pathloss_exponent
    d = element_distances(layout, user, config)
    phases = link_phases(layout, user, config)
    los = np.exp(-1j * phases) / d ** (chi / 2.0)
    coherent = abs(los.sum()) ** 2
    diffuse = float(np.sum(d ** -chi))
    return consts.reference_gain / (kappa + 1.0) * (kappa * coherent + diffuse)


def ase_report(layout_pt: PinchLayout, layout_st: PinchLayout, p_st: float,
               pu: Vec3, su: Vec3, config: SystemConfig) -> AseReport:
    """Closed-form average SEs of both users for given layouts and ST power.

    Power is split evenly across each transmitter's elements; the PT runs
    at its full budget while the ST uses ``p_st``.
    """
    if not 0.0 < p_st <= config.power_st_max * (1.0 + 1e-12):
        raise ValueError(
            f"p_st must lie in (0, {config.power_st_max}], got {p_st}")
    n = config.pa_count_primary
    m = config.pa_count_secondary
    sigma2 = config.noise_power
    g_pu_pt = average_channel_gain(layout_pt, pu, config)
    g_pu_st = average_channel_gain(layout_st, pu, config)
    g_su_pt = average_channel_gain(layout_pt, su, config)
    g_su_st = average_channel_gain(layout_st, su, config)
    r_p = math.log2(1.0 + (m * config.power_pt * g_pu_pt)
                    / (n * p_st * g_pu_st + n * m * sigma2))
    r_s = math.log2(1.0 + (n * p_st * g_su_st)
                    / (m * config.power_pt * g_su_pt + n * m * sigma2))
    return AseReport(
        ase_pu=r_p,
        ase_su=r_s,
        sum_se=r_p + r_s,
        gain_pu_pt=g_pu_pt,
        gain_pu_st=g_pu_st,
        gain_su_pt=g_su_pt,
        gain_su_st=g_su_st,
        interference_pu=p_st / m * g_pu_st,
        p_st=p_st,
    )


def instantaneous_sinrs(realization, p_st: float,
                        config: SystemConfig) -> tuple[float, float]:
    """SINRs of PU and SU for one sampled channel realization."""
    n = config.pa_count_primary
    m = config.pa_count_secondary
    sigma2 = config.noise_power
    sig_p = abs(np.sum(realization.h_pt_to_pu * realization.g_pt)) ** 2
    cross_p = abs(np.sum(realization.h_st_to_pu * realization.g_st)) ** 2
    sig_s = abs(np.sum(realization.h_st_to_su * realization.g_st)) ** 2
    cross_s = abs(np.sum(realization.h_pt_to_su * realization.g_pt)) ** 2
    gamma_p = (config.power_pt / n * sig_p) / (p_st / m * cross_p + sigma2)
    gamma_s = (p_st / m * sig_s) / (config.power_pt / n * cross_s + sigma2)
    return float(gamma_p), float(gamma_s)
