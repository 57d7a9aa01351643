"""Line-of-sight Lambertian channel gains for indoor LED fixtures.

Positions are in meters. Room coordinates are centered in the horizontal
plane: a room of dims ``(X, Y, Z)`` spans ``[-X/2, X/2] x [-Y/2, Y/2] x [0, Z]``.
Angles are degrees at the dataclass boundary and radians everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .noise import NoiseParams

DOWN = (0.0, 0.0, -1.0)
UP = (0.0, 0.0, 1.0)

_ORIENTATION_TOL = 1e-9


def _vec3(value, name: str) -> Tuple[float, float, float]:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite 3-vector, got {value!r}")
    return tuple(float(v) for v in arr)


def _unit(value, name: str) -> Tuple[float, float, float]:
    vec = _vec3(value, name)
    if abs(math.sqrt(sum(v * v for v in vec)) - 1.0) > _ORIENTATION_TOL:
        raise ValueError(f"{name} must have unit norm, got {value!r}")
    return vec


@dataclass(frozen=True)
class LedFixture:
    """A fixture of ``led_count`` co-located LEDs acting as one source."""

    position: Tuple[float, float, float]
    led_count: int = 3600
    semi_angle: float = 60.0
    orientation: Tuple[float, float, float] = DOWN

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "orientation", _unit(self.orientation, "orientation"))
        if isinstance(self.led_count, bool) or int(self.led_count) != self.led_count:
            raise ValueError(f"led_count must be an integer, got {self.led_count!r}")
        if self.led_count < 1:
            raise ValueError(f"led_count must be >= 1, got {self.led_count}")
        object.__setattr__(self, "led_count", int(self.led_count))
        if not 0.0 < self.semi_angle < 90.0:
            raise ValueError(f"semi_angle must lie in (0, 90) degrees, got {self.semi_angle}")


@dataclass(frozen=True)
class PhotoDetector:
    """Receiver photodiode with an optical filter and a concentrator."""

    position: Tuple[float, float, float]
    area: float = 1e-4
    refractive_index: float = 1.5
    fov: float = 60.0
    filter_gain: float = 1.0
    responsivity: float = 1.0
    orientation: Tuple[float, float, float] = UP

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "orientation", _unit(self.orientation, "orientation"))
        if not self.area > 0:
            raise ValueError(f"area must be > 0, got {self.area}")
        if not self.refractive_index >= 1:
            raise ValueError(f"refractive_index must be >= 1, got {self.refractive_index}")
        if not 0.0 < self.fov <= 90.0:
            raise ValueError(f"fov must lie in (0, 90] degrees, got {self.fov}")
        if not self.filter_gain > 0:
            raise ValueError(f"filter_gain must be > 0, got {self.filter_gain}")
        if not self.responsivity > 0:
            raise ValueError(f"responsivity must be > 0, got {self.responsivity}")


NoiseMode = Union[str, NoiseParams]


@dataclass(frozen=True)
class RoomScenario:
    room_dims: Tuple[float, float, float]
    fixtures: Tuple[LedFixture, ...]
    users: Tuple[PhotoDetector, ...]
    conversion_factor: float = 1.0
    noise_mode: NoiseMode = "unit"
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        dims = _vec3(self.room_dims, "room_dims")
        if min(dims) <= 0:
            raise ValueError(f"room_dims must be positive, got {dims}")
        object.__setattr__(self, "room_dims", dims)
        object.__setattr__(self, "fixtures", tuple(self.fixtures))
        object.__setattr__(self, "users", tuple(self.users))
        if not self.fixtures:
            raise ValueError("scenario needs at least one fixture")
        if not self.users:
            raise ValueError("scenario needs at least one user")
        for kind, items in (("fixtures", self.fixtures), ("users", self.users)):
            for idx, item in enumerate(items):
                if not inside_room(item.position, dims):
                    raise ValueError(f"{kind}[{idx}] position {item.position} lies outside room {dims}")
        if not self.conversion_factor > 0:
            raise ValueError(f"conversion_factor must be > 0, got {self.conversion_factor}")
        if not (self.noise_mode == "unit" or isinstance(self.noise_mode, NoiseParams)):
            raise ValueError(f"noise_mode must be 'unit' or NoiseParams, got {self.noise_mode!r}")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_fixtures(self) -> int:
        return len(self.fixtures)


def inside_room(position: Sequence[float], room_dims: Sequence[float], tol: float = 1e-12) -> bool:
    x, y, z = position
    dx, dy, dz = room_dims
    return abs(x) <= dx / 2 + tol and abs(y) <= dy / 2 + tol and -tol <= z <= dz + tol


@dataclass(frozen=True)
class ChannelMatrix:
    """DC gains, one row per user and one column per fixture."""

    gains: np.ndarray

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float)
        if gains.ndim != 2:
            raise ValueError("gains must be a users x fixtures array")
        if np.any(gains < 0) or not np.all(np.isfinite(gains)):
            raise ValueError("gains must be finite and nonnegative")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)

    @property
    def shape(self):
        return self.gains.shape

    def user(self, k: int) -> np.ndarray:
        return self.gains[k]


def lambertian_order(semi_angle: float) -> float:
    """Lambertian mode number for an LED with the given half-power semi-angle (deg).

    Uses ``m = -ln 2 / ln cos(semi_angle)`` so that a 60 deg LED is the ideal
    Lambertian source with m = 1.
    """
    if not 0.0 < semi_angle < 90.0:
        raise ValueError(f"semi_angle must lie in (0, 90) degrees, got {semi_angle}")
    return -math.log(2.0) / math.log(math.cos(math.radians(semi_angle)))


def concentrator_gain(incidence: float, fov: float, refractive_index: float) -> float:
    """Ideal non-imaging concentrator gain; all angles in degrees."""
    if incidence < 0:
        raise ValueError(f"incidence angle must be nonnegative, got {incidence}")
    if not 0.0 < fov <= 90.0:
        raise ValueError(f"fov must lie in (0, 90] degrees, got {fov}")
    if refractive_index < 1:
        raise ValueError(f"refractive_index must be >= 1, got {refractive_index}")
    if incidence > fov:
        return 0.0
    return refractive_index**2 / math.sin(math.radians(fov)) ** 2


def radiant_intensity(m: float, emission_angle: float) -> float:
    """Normalized Lambertian radiant intensity at ``emission_angle`` degrees off-axis."""
    if not m > 0:
        raise ValueError(f"Lambertian order must be positive, got {m}")
    if not 0.0 <= emission_angle <= 90.0:
        raise ValueError(f"emission angle must lie in [0, 90] degrees, got {emission_angle}")
    cos_e = max(math.cos(math.radians(emission_angle)), 0.0)
    return (m + 1) / (2 * math.pi) * cos_e**m


def _link_angles(fixture: LedFixture, pd: PhotoDetector):
    """Distance, cos(emission), cos(incidence) for the fixture -> pd link."""
    delta = np.subtract(pd.position, fixture.position)
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise ValueError("fixture and photodetector positions coincide")
    cos_emit = float(np.dot(fixture.orientation, delta)) / dist
    cos_inc = float(np.dot(pd.orientation, -delta)) / dist
    return dist, min(max(cos_emit, -1.0), 1.0), min(max(cos_inc, -1.0), 1.0)


def fixture_gain(fixture: LedFixture, pd: PhotoDetector) -> float:
    """DC gain from a whole fixture to one photodetector.

    The fixture's LEDs share one position, so the gain is ``led_count`` times
    the single-LED gain. Returns exactly 0 outside the receiver field of view
    or behind the LED plane.
    """
    dist, cos_emit, cos_inc = _link_angles(fixture, pd)
    incidence = math.degrees(math.acos(cos_inc))
    if cos_emit <= 0.0 or incidence > pd.fov:
        return 0.0
    m = lambertian_order(fixture.semi_angle)
    emission = math.degrees(math.acos(cos_emit))
    single = (
        pd.area
        / dist**2
        * radiant_intensity(m, emission)
        * pd.filter_gain
        * concentrator_gain(incidence, pd.fov, pd.refractive_index)
        * cos_inc
    )
    return fixture.led_count * single


def channel_matrix(scenario: RoomScenario) -> ChannelMatrix:
    gains = [[fixture_gain(fx, pd) for fx in scenario.fixtures] for pd in scenario.users]
    return ChannelMatrix(np.array(gains, dtype=float))
