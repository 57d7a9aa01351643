from __future__ import annotations

from dataclasses import asdict, dataclass, field

SUBPROBLEM_METHODS = ("projected_gradient", "admm")


@dataclass(frozen=True)
class SubproblemConfig:
    method: str = "projected_gradient"
    tolerance: float = 1e-7
    max_iterations: int = 5000
    # projected gradient: initial step is step_scale / Lipschitz, shrunk by backtracking
    step_scale: float = 1.0
    backtrack: float = 0.5
    # ADMM: penalty is admm_rho times the largest curvature of the quadratic
    admm_rho: float = 1.0

    def __post_init__(self):
        if self.method not in SUBPROBLEM_METHODS:
            raise ValueError(f"subproblem method must be one of {SUBPROBLEM_METHODS}, got {self.method!r}")
        if not self.tolerance > 0:
            raise ValueError("subproblem tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("subproblem max_iterations must be >= 1")
        if not (self.step_scale > 0 and 0 < self.backtrack < 1 and self.admm_rho > 0):
            raise ValueError("invalid subproblem step/penalty parameters")


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 200
    rel_tolerance: float = 1e-5
    restarts: int = 5
    rng_seed: int = 0
    subproblem: SubproblemConfig = field(default_factory=SubproblemConfig)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = dict(data)
        unknown = set(data) - {"max_iterations", "rel_tolerance", "restarts", "rng_seed", "subproblem"}
        if unknown:
            raise ValueError(f"unknown optimizer keys: {sorted(unknown)}")
        sub = data.pop("subproblem", None)
        if isinstance(sub, dict):
            sub_unknown = set(sub) - set(SubproblemConfig.__dataclass_fields__)
            if sub_unknown:
                raise ValueError(f"unknown subproblem keys: {sorted(sub_unknown)}")
            sub = SubproblemConfig(**sub)
        elif isinstance(sub, str):
            sub = SubproblemConfig(method=sub)
        return cls(**data, subproblem=sub or SubproblemConfig())

    def to_dict(self) -> dict:
        return asdict(self)
