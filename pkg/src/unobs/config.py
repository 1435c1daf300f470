from __future__ import annotations

from json import JSONDecodeError, loads
from pathlib import Path
from typing import Any, Literal

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .nodes.run import unobs_path

Preset = Literal["paper", "quick"]

_QUICK = {
    "band_limit": 16,
    "random_cases": 3,
    "radon_cases": 6,
    "basis_max_degree": 5,
    "polyharmonic_max_degree": 8,
    "jump_radii": [2.0],
    "jump_times": [-0.5, -1.0],
    "growth_max": 30,
    "membership_terms": 2,
    "limit_scales": [10.0, 20.0, 40.0],
}


class RunConfig(BaseModel):
    """Settings of a verification campaign. Defaults are the `paper` preset."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    preset: Preset = Field(default="paper", description="Named preset the defaults came from")
    band_limit: int = Field(default=32, ge=0, description="Angular quadrature band limit L")
    r_max_factor: float = Field(default=50.0, gt=1.0, description="Radial truncation R_max / ξ")
    tau_step: float = Field(default=0.01, gt=0.0, description="Step of the uniform τ-grid")
    tau_max_factor: float = Field(default=5.0, gt=0.0, description="τ-grid covers [0, factor·ξ0]")
    derivative_step: float = Field(default=1e-4, gt=0.0, description="Central difference step")
    oracle_tol: float = Field(default=1e-6, gt=0.0, description="Agreement of independent oracles")
    unobservability_tol: float = Field(default=1e-8, gt=0.0, description="Residual of O on D^ξ")
    basis_tol: float = Field(default=1e-9, gt=0.0, description="Residual of O on basis elements")
    jump_tol: float = Field(default=1e-2, gt=0.0, description="Relative tolerance of jump ratios")
    unitarity_tol: float = Field(default=1e-5, gt=0.0, description="Relative norm gap of W")
    order_min: float = Field(default=0.9, gt=0.0, description="Smallest accepted convergence order in 1/s")
    seed: int = Field(default=0, description="Seed of the randomized property suites")
    random_cases: int = Field(default=10, ge=1, description="Random controls for unitarity and duality")
    radon_cases: int = Field(default=30, ge=1, description="Random cases for the Radon oracle comparison")
    basis_max_degree: int = Field(default=9, ge=1, description="Largest l of the basis unobservability check")
    polyharmonic_max_degree: int = Field(default=12, ge=1, description="Largest l of the polyharmonic check")
    jump_radii: list[float] = Field(default=[1.5, 2.0, 3.0], description="Radii ξ0 of the jump experiments")
    jump_times: list[float] = Field(default=[-0.5, -1.0, -2.0, -4.0], description="Negative times t")
    growth_max: int = Field(default=50, ge=5, description="Largest N of the doubling check")
    membership_terms: int = Field(default=5, ge=1, description="Terms of h_N certified for membership")
    limit_scales: list[float] = Field(default=[10.0, 20.0, 40.0, 80.0], description="Scales s of the limit definition of O")
    outdir: Path = Field(default_factory=unobs_path, description="Directory for artifacts")

    @classmethod
    def from_preset(cls, preset: Preset = "paper", **overrides) -> RunConfig:
        values = dict(_QUICK) if preset == "quick" else {}
        values.update(overrides)
        return build_config({"preset": preset, **values})


def _parse_value(val: str):
    try:
        return loads(val)
    except JSONDecodeError:
        return val


def parse_assignment(text: str) -> tuple[str, Any]:
    """'key=value' with the value parsed as JSON, falling back to the raw string."""
    if "=" not in text:
        raise ConfigError(f"Expected key=value, got {text}")
    key, val = text.split("=", 1)
    return key.strip(), _parse_value(val.strip())


def read_config_file(path: Path | str) -> dict[str, Any]:
    """Flat key=value file; `#` starts a comment, blank lines are skipped."""
    values = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = parse_assignment(line)
        except ConfigError as e:
            raise ConfigError(f"{path}:{number}: {e}") from e
        values[key] = value
    return values


def build_config(values: dict[str, Any]) -> RunConfig:
    unknown = sorted(set(values) - set(RunConfig.model_fields))
    if unknown:
        raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_config(
    path: Path | str | None = None,
    preset: Preset | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Preset defaults, then the file, then explicit overrides."""
    values = read_config_file(path) if path else {}
    values.update(overrides or {})
    name = preset or values.pop("preset", "paper")
    values.pop("preset", None)
    if name not in ("paper", "quick"):
        raise ConfigError(f"Unknown preset {name}")
    config = RunConfig.from_preset(name, **values)
    logger.debug(f"Loaded configuration (preset {config.preset}) from {path or 'defaults'}")
    return config
