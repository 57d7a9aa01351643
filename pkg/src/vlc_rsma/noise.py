"""Receiver noise: shot + thermal variance, or the normalized unit-noise mode."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .geometry import PhotoDetector, RoomScenario

ELECTRON_CHARGE = 1.602176634e-19
BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class NoiseParams:
    """Photo-receiver parameters for the physical noise model (SI units)."""

    bandwidth: float
    temperature: float
    open_loop_gain: float
    fet_noise_factor: float
    fet_transconductance: float
    background_current: float = 0.0
    capacitance_per_area: float = 0.0
    noise_bw_factor_I2: float = 0.562
    noise_bw_factor_I3: float = 0.0868
    electron_charge: float = ELECTRON_CHARGE
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        for name in (
            "bandwidth",
            "temperature",
            "open_loop_gain",
            "fet_noise_factor",
            "fet_transconductance",
            "noise_bw_factor_I2",
            "noise_bw_factor_I3",
            "electron_charge",
            "boltzmann",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        # zero is a legitimate "switched off" value for these two
        for name in ("background_current", "capacitance_per_area"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


def _attr(pd, name):
    # bare floats stand in for a detector in degenerate checks (e.g. zero area)
    return getattr(pd, name, pd)


def shot_variance(params: NoiseParams, pd: "PhotoDetector | float", received_optical_power: float) -> float:
    """Shot-noise variance (A^2) at the given mean received optical power (W).

    ``pd`` may be a PhotoDetector or its responsivity as a float.
    """
    if received_optical_power < 0:
        raise ValueError(f"received optical power must be >= 0, got {received_optical_power}")
    photocurrent = _attr(pd, "responsivity") * received_optical_power
    return (
        2.0
        * params.electron_charge
        * params.bandwidth
        * (photocurrent + params.background_current * params.noise_bw_factor_I2)
    )


def thermal_variance(params: NoiseParams, pd: "PhotoDetector | float") -> float:
    """Thermal (feedback resistor + FET channel) noise variance in A^2.

    ``pd`` may be a PhotoDetector or its area in m^2 as a float.
    """
    area = _attr(pd, "area")
    kt = params.boltzmann * params.temperature
    b = params.bandwidth
    eta = params.capacitance_per_area
    feedback = 8 * math.pi * kt / params.open_loop_gain * eta * area * params.noise_bw_factor_I2 * b**2
    fet = (
        16 * math.pi**2 * kt * params.fet_noise_factor / params.fet_transconductance
        * eta**2 * area**2 * params.noise_bw_factor_I3 * b**3
    )
    return feedback + fet


def total_variance(scenario: "RoomScenario", user_index: int, received_optical_power: float = 0.0) -> float:
    """Total received noise variance for one user.

    Unit mode returns exactly 1.0. Physical mode returns shot + thermal and
    refuses a non-positive total, which would make SINRs undefined.
    """
    pd = scenario.users[user_index]
    if scenario.noise_mode == "unit":
        return 1.0
    params = scenario.noise_mode
    total = shot_variance(params, pd, received_optical_power) + thermal_variance(params, pd)
    if not total > 0:
        raise ValueError(f"noise variance for user {user_index} is non-positive ({total})")
    return total


def normalized_variance(scenario: "RoomScenario", user_index: int, received_optical_power: float = 0.0) -> float:
    """Noise variance referred to the optical drive domain, sigma^2 / (conversion * responsivity)^2."""
    if scenario.noise_mode == "unit":
        return 1.0
    scale = scenario.conversion_factor * scenario.users[user_index].responsivity
    return total_variance(scenario, user_index, received_optical_power) / scale**2
