"""Scenario files, SNR and user-separation sweeps.

Scenario and sweep files are JSON. A scenario file looks like::

    {
      "id": "scenario1_4led",
      "room": [5.0, 5.0, 4.0],
      "fixtures": [{"position": [-1.25, -1.25, 4.0]}, ...],
      "users": [{"position": [-1.5, 0.0, 0.8]}, {"position": [1.5, 0.0, 0.8]}]
    }

Omitted optics fall back to the defaults of ``LedFixture`` and
``PhotoDetector`` (3600 LEDs per fixture, 60 deg semi-angle, 1 cm^2 area,
n = 1.5, unit filter gain, 60 deg field of view). ``noise`` is either
``"unit"`` (the default) or an object with ``NoiseParams`` fields.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import LedFixture, PhotoDetector, RoomScenario, channel_matrix
from .noise import NoiseParams
from .optimizer import OptimizerConfig, optimize_wsr
from .schemes import NOMA, RSMA, SCHEMES, SDMA, StreamPlan

SNR_SWEEP = "snr_sweep"
SEPARATION_SWEEP = "separation_sweep"
SWEEP_KINDS = (SNR_SWEEP, SEPARATION_SWEEP)
DEFAULT_SNR_DB = tuple(float(v) for v in range(0, 41, 5))
DEFAULT_SEPARATION_M = tuple(round(0.4 * i, 10) for i in range(13))
USER_HEIGHT = 0.8
WORKERS_ENV = "RSMA_VLC_WORKERS"
BUNDLED = ("scenario1_2led", "scenario1_4led", "scenario2_2led", "scenario2_4led")

# file key -> dataclass field
_FIXTURE_KEYS = {
    "position": "position",
    "led_count": "led_count",
    "semi_angle_deg": "semi_angle",
    "orientation": "orientation",
}
_USER_KEYS = {
    "position": "position",
    "area_m2": "area",
    "refractive_index": "refractive_index",
    "fov_deg": "fov",
    "filter_gain": "filter_gain",
    "responsivity": "responsivity",
    "orientation": "orientation",
}
_SCENARIO_KEYS = {"id", "room", "fixtures", "users", "conversion_factor", "noise"}
_SPEC_KEYS = {
    "kind", "scenario_file", "schemes", "snr_points_db", "separation_points_m", "weights", "optimizer", "id",
}


class ScenarioError(ValueError):
    """A scenario or sweep file failed to parse or validate."""


def _read_json(path: Path):
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _build(cls, entry, keys, where):
    if not isinstance(entry, dict):
        raise ScenarioError(f"{where}: expected an object")
    unknown = set(entry) - set(keys)
    if unknown:
        raise ScenarioError(f"{where}: unknown keys {sorted(unknown)}")
    if "position" not in entry:
        raise ScenarioError(f"{where}.position: missing")
    kwargs = {keys[k]: v for k, v in entry.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        # validation messages lead with the dataclass field; report the file key instead
        msg = str(exc)
        attr = msg.split(" ", 1)[0]
        file_key = {v: k for k, v in keys.items()}.get(attr)
        raise ScenarioError(f"{where}.{file_key}: {msg}" if file_key else f"{where}: {msg}") from None


def scenario_from_dict(data, name: Optional[str] = None) -> RoomScenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"scenario: unknown keys {sorted(unknown)}")
    for key in ("room", "fixtures", "users"):
        if key not in data:
            raise ScenarioError(f"{key}: missing")
    for key in ("fixtures", "users"):
        if not isinstance(data[key], list):
            raise ScenarioError(f"{key}: expected a list")
    fixtures = [_build(LedFixture, f, _FIXTURE_KEYS, f"fixtures[{i}]") for i, f in enumerate(data["fixtures"])]
    users = [_build(PhotoDetector, u, _USER_KEYS, f"users[{i}]") for i, u in enumerate(data["users"])]
    noise = data.get("noise", "unit")
    if isinstance(noise, dict):
        try:
            noise = NoiseParams(**noise)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"noise: {exc}") from None
    elif noise != "unit":
        raise ScenarioError(f"noise: expected \"unit\" or an object, got {noise!r}")
    try:
        return RoomScenario(
            room_dims=tuple(data["room"]),
            fixtures=tuple(fixtures),
            users=tuple(users),
            conversion_factor=data.get("conversion_factor", 1.0),
            noise_mode=noise,
            name=data.get("id", name),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario: {exc}") from None


def bundled_scenario_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in BUNDLED:
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Path(str(resources.files("vlc_rsma") / "data" / f"{stem}.json"))


def resolve_scenario_path(ref, base: Optional[Path] = None) -> Path:
    """Resolve a file reference: absolute, relative to ``base``, or a bundled name."""
    path = Path(ref)
    if not path.is_absolute() and base is not None:
        candidate = base / path
        if candidate.exists():
            return candidate
    if path.exists():
        return path
    try:
        return bundled_scenario_path(path.name)
    except FileNotFoundError:
        raise FileNotFoundError(f"scenario file not found: {ref}") from None


def load_scenario(path) -> RoomScenario:
    """Parse and validate a scenario file (or a bundled scenario name)."""
    path = resolve_scenario_path(path)
    return scenario_from_dict(_read_json(path), name=path.stem)


def scenario_to_dict(scenario: RoomScenario) -> dict:
    def invert(obj, keys):
        return {file_key: (list(getattr(obj, attr)) if isinstance(getattr(obj, attr), tuple) else getattr(obj, attr))
                for file_key, attr in keys.items()}

    data = {
        "id": scenario.name,
        "room": list(scenario.room_dims),
        "fixtures": [invert(f, _FIXTURE_KEYS) for f in scenario.fixtures],
        "users": [invert(u, _USER_KEYS) for u in scenario.users],
        "conversion_factor": scenario.conversion_factor,
    }
    if isinstance(scenario.noise_mode, NoiseParams):
        data["noise"] = {k: getattr(scenario.noise_mode, k) for k in NoiseParams.__dataclass_fields__}
    else:
        data["noise"] = scenario.noise_mode
    return data


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    scenario: RoomScenario
    schemes: Tuple[str, ...] = SCHEMES
    snr_points_db: Tuple[float, ...] = DEFAULT_SNR_DB
    separation_points_m: Tuple[float, ...] = DEFAULT_SEPARATION_M
    weights: Tuple[float, ...] = (0.5, 0.5)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    scenario_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ScenarioError(f"kind: must be one of {SWEEP_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "snr_points_db", tuple(float(v) for v in self.snr_points_db))
        object.__setattr__(self, "separation_points_m", tuple(float(v) for v in self.separation_points_m))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        if not self.schemes or any(s not in SCHEMES for s in self.schemes) or len(set(self.schemes)) != len(self.schemes):
            raise ScenarioError(f"schemes: must be a non-empty subset of {SCHEMES}, got {list(self.schemes)}")
        if not self.snr_points_db or not all(math.isfinite(v) for v in self.snr_points_db):
            raise ScenarioError("snr_points_db: must be a non-empty list of finite values")
        if self.kind == SEPARATION_SWEEP:
            if not self.separation_points_m or any(not (v >= 0 and math.isfinite(v)) for v in self.separation_points_m):
                raise ScenarioError("separation_points_m: must be a non-empty list of finite values >= 0")
        if len(self.weights) != self.scenario.n_users or any(not (w >= 0) for w in self.weights):
            raise ScenarioError("weights: need one nonnegative weight per user")
        if self.scenario_id is None:
            object.__setattr__(self, "scenario_id", self.scenario.name or "scenario")

    def points(self) -> List[Tuple[float, Optional[float]]]:
        """(snr_db, separation_m) work items in sweep order."""
        if self.kind == SNR_SWEEP:
            return [(snr, None) for snr in self.snr_points_db]
        return [(snr, sep) for snr in self.snr_points_db for sep in self.separation_points_m]


def load_sweep_spec(path) -> SweepSpec:
    path = Path(path)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ScenarioError("sweep spec: expected a JSON object")
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise ScenarioError(f"sweep spec: unknown keys {sorted(unknown)}")
    for key in ("kind", "scenario_file"):
        if key not in data:
            raise ScenarioError(f"{key}: missing")
    scenario_path = resolve_scenario_path(data["scenario_file"], path.parent)
    scenario = scenario_from_dict(_read_json(scenario_path), name=scenario_path.stem)
    kwargs = {k: data[k] for k in ("schemes", "snr_points_db", "separation_points_m", "weights") if k in data}
    try:
        optimizer = OptimizerConfig.from_dict(data.get("optimizer", {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"optimizer: {exc}") from None
    return SweepSpec(
        kind=data["kind"], scenario=scenario, optimizer=optimizer, scenario_id=data.get("id", scenario.name), **kwargs
    )


@dataclass(frozen=True)
class ResultRecord:
    scheme: str
    scenario_id: str
    snr_db: float
    separation_m: Optional[float]
    wsr: float
    rates: Tuple[float, ...]  # overall rate per user
    common_rate: float
    iterations_used: int
    converged: bool
    flags: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.wsr >= 0:
            raise ValueError(f"negative WSR {self.wsr}")


def separated_users(scenario: RoomScenario, separation: float) -> RoomScenario:
    """Move two users to (-d/2, 0, 0.8) and (d/2, 0, 0.8), keeping their optics."""
    if scenario.n_users != 2:
        raise ScenarioError("separation sweeps need exactly two users")
    half = separation / 2.0
    users = tuple(
        replace(u, position=(x, 0.0, USER_HEIGHT)) for u, x in zip(scenario.users, (-half, half))
    )
    return replace(scenario, users=users)


def snr_to_epsilon(snr_db: float) -> float:
    """Amplitude budget for an SNR in dB with unit noise: eps = 10^(SNR/10)."""
    return 10.0 ** (snr_db / 10.0)


def _order(schemes):
    # RSMA last so it can reuse the SDMA and NOMA solutions as seeds
    return sorted(schemes, key=lambda s: (s == RSMA, s))


def run_point(spec: SweepSpec, point) -> List[ResultRecord]:
    """All requested schemes at one (snr, separation) point."""
    snr, sep = point
    scenario = spec.scenario if sep is None else separated_users(spec.scenario, sep)
    eps = snr_to_epsilon(snr)
    H = channel_matrix(scenario)
    done = {}
    records = []
    for scheme in _order(spec.schemes):
        plan = StreamPlan.for_scheme(scheme, H, scenario.n_users)
        seeds = [done[s] for s in (SDMA, NOMA) if s in done] if scheme == RSMA else ()
        try:
            sol = optimize_wsr(scenario, plan, spec.weights, eps, spec.optimizer, seed_solutions=seeds)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            # a failed point is recorded, never fatal for the sweep
            records.append(ResultRecord(
                scheme, spec.scenario_id, snr, sep, 0.0, tuple(0.0 for _ in range(scenario.n_users)), 0.0, 0,
                False, (f"error: {exc}",),
            ))
            continue
        done[scheme] = sol
        rep = sol.report
        records.append(ResultRecord(
            scheme=scheme,
            scenario_id=spec.scenario_id,
            snr_db=snr,
            separation_m=sep,
            wsr=max(float(rep.wsr), 0.0),
            rates=tuple(float(r) for r in rep.overall_rate_per_user),
            common_rate=float(rep.achievable_common_rate),
            iterations_used=int(sol.iterations_used),
            converged=bool(sol.converged),
            flags=sol.flags,
        ))
    return records


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> List[ResultRecord]:
    """One record per (scheme, point). Points run in parallel when workers > 1.

    Every point is computed independently, so the records do not depend on
    the worker count or on completion order.
    """
    workers = worker_count(1) if workers is None else workers
    points = spec.points()
    if workers <= 1 or len(points) == 1:
        chunks = [run_point(spec, p) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
            chunks = list(pool.map(run_point, [spec] * len(points), points))
    return sort_records([r for chunk in chunks for r in chunk])


def sort_records(records: Sequence[ResultRecord]) -> List[ResultRecord]:
    return sorted(records, key=lambda r: (r.scheme, r.snr_db, -1.0 if r.separation_m is None else r.separation_m))
