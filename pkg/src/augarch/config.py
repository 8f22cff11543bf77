"""Experiment configuration documents.

A run is described by one JSON document with a model block, a transform
block, an experiment block (one of the experiment kinds with its
parameters), a 64-bit seed and an output directory.  Unknown keys are
rejected and every default is materialized in the effective configuration.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from augarch.exceptions import ConfigError, ModelError
from augarch.model import InnovationDist, LinkFunction, ModelSpec, Transform, coeff_from_dict, make_builtin

__all__ = ["EXPERIMENT_KINDS", "ExperimentConfig", "build_model", "build_transform", "load_config", "parse_config"]

_U64 = (1 << 64) - 1
_S_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InnovationBlock(_Strict):
    kind: Literal["normal", "student-t", "uniform", "two-point", "centered-exponential"] = "normal"
    df: Optional[float] = None


class LinkBlock(_Strict):
    kind: Literal["polynomial", "exponential"] = "polynomial"
    delta: float = 1.0


class ModelBlock(_Strict):
    """Either a built-in ``family`` with ``params`` or raw ``c``, ``g`` and ``link``."""

    family: Optional[str] = None
    params: dict[str, float] = Field(default_factory=dict)
    innovation: Optional[InnovationBlock] = None
    c: Optional[dict[str, Any]] = None
    g: Optional[dict[str, Any]] = None
    link: Optional[LinkBlock] = None
    nonnegative: Optional[bool] = None

    @model_validator(mode="after")
    def _one_source(self):
        raw = self.c is not None or self.g is not None or self.link is not None
        if self.family is None and not raw:
            raise ValueError("give either family or raw c, g (and link)")
        if self.family is not None and raw:
            raise ValueError("family and raw c/g/link are mutually exclusive")
        if raw and (self.c is None or self.g is None):
            raise ValueError("raw models need both c and g")
        return self


class TransformBlock(_Strict):
    kind: Literal["power-abs", "signed-power"] = "power-abs"
    nu: float = Field(1.0, gt=0)


class SimulateExp(_Strict):
    kind: Literal["simulate"]
    n: int = Field(1000, ge=1)
    depth: Optional[int] = Field(None, ge=1)


class CoupleExp(_Strict):
    kind: Literal["couple"]
    n: int = Field(1000, ge=1)
    m: list[int] = Field(default_factory=lambda: [1, 5, 20])
    depth: Optional[int] = Field(None, ge=1)


class ConditionsExp(_Strict):
    kind: Literal["conditions"]
    nu: list[float] = Field(default_factory=lambda: [1.0, 2.0])
    mu: list[float] = Field(default_factory=lambda: [1.0, 2.0, 3.0])
    budget: int = Field(1_000_000, ge=1000)


class L2DecayExp(_Strict):
    kind: Literal["l2decay"]
    m: list[int] = Field(default_factory=lambda: list(range(1, 25)))
    reps: int = Field(100_000, ge=100)
    depth: Optional[int] = Field(None, ge=1)


class TailsExp(_Strict):
    kind: Literal["tails"]
    m: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64])
    reps: int = Field(100_000, ge=100)
    alpha: Optional[float] = Field(None, gt=0)
    depth: Optional[int] = Field(None, ge=1)


class AcovExp(_Strict):
    kind: Literal["acov"]
    max_lag: int = Field(20, ge=0)
    budget: int = Field(1_000_000, ge=100)
    batches: int = Field(20, ge=2)
    depth: Optional[int] = Field(None, ge=1)


class LrvExp(_Strict):
    kind: Literal["lrv"]
    L: Optional[int] = Field(None, ge=0)
    budget: int = Field(10_000_000, ge=1000)
    method: Literal["plug-in", "bartlett"] = "plug-in"
    variant: Literal["observation", "volatility"] = "observation"


class CltExp(_Strict):
    kind: Literal["clt", "supclt"]
    n: int = Field(4000, ge=1)
    reps: int = Field(4000, ge=10)
    calibration_size: int = Field(10_000_000, ge=1000)
    level: float = Field(0.01, gt=0, lt=1)
    slack: float = Field(0.009, ge=0)
    variant: Literal["observation", "volatility"] = "observation"
    depth: Optional[int] = Field(None, ge=1)


class BerryExp(_Strict):
    kind: Literal["berry"]
    n_grid: list[int] = Field(default_factory=lambda: [500, 2000, 8000])
    reps: int = Field(100_000, ge=10)
    calibration_size: int = Field(100_000_000, ge=1000)
    depth: Optional[int] = Field(None, ge=1)


class EmpProcExp(_Strict):
    kind: Literal["empproc"]
    n: int = Field(4000, ge=1)
    s_grid: list[float] = Field(default_factory=lambda: list(_S_GRID))
    t_grid: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    cdf_size: int = Field(1_000_000, ge=100)
    reps: int = Field(0, ge=0)
    s: float = Field(0.5, gt=0, lt=1)
    K: Optional[int] = Field(None, ge=0)
    budget: int = Field(10_000_000, ge=1000)
    level: float = Field(0.01, gt=0, lt=1)
    slack: float = Field(0.009, ge=0)
    depth: Optional[int] = Field(None, ge=1)


class GammaExp(_Strict):
    kind: Literal["gamma"]
    s_grid: list[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    K: Optional[int] = Field(None, ge=0)
    budget: int = Field(10_000_000, ge=1000)
    cdf_size: int = Field(1_000_000, ge=100)
    exact_cdf: bool = False
    depth: Optional[int] = Field(None, ge=1)


class ChangePointExp(_Strict):
    kind: Literal["changepoint"]
    n: int = Field(4000, ge=2)
    reps: int = Field(2000, ge=10)
    changed_params: dict[str, float]
    change_index: Optional[int] = Field(None, ge=1)
    s_grid: list[float] = Field(default_factory=lambda: list(_S_GRID))
    cdf_size: int = Field(1_000_000, ge=100)
    depth: Optional[int] = Field(None, ge=1)


Experiment = Annotated[
    Union[
        SimulateExp, CoupleExp, ConditionsExp, L2DecayExp, TailsExp, AcovExp, LrvExp,
        CltExp, BerryExp, EmpProcExp, GammaExp, ChangePointExp,
    ],
    Field(discriminator="kind"),
]

EXPERIMENT_KINDS = (
    "simulate", "couple", "conditions", "l2decay", "tails", "acov", "lrv",
    "clt", "supclt", "berry", "empproc", "gamma", "changepoint",
)


class ExperimentConfig(_Strict):
    model: ModelBlock
    transform: TransformBlock = Field(default_factory=TransformBlock)
    experiment: Experiment
    seed: int = Field(0, ge=0, le=_U64)
    output: str = "out"

    def effective(self) -> dict:
        """The configuration with every default materialized."""
        return self.model_dump(mode="json")


def _describe_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {_describe_error(exc)}") from None


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(data)


def build_model(block: ModelBlock, family: str | None = None, params: dict | None = None) -> ModelSpec:
    """Model from a config block, optionally with replaced family parameters."""
    innov = InnovationDist.from_dict(block.innovation.model_dump()) if block.innovation else None
    try:
        if block.family is not None:
            merged = dict(block.params)
            merged.update(params or {})
            return make_builtin(family or block.family, merged, innov)
        if params:
            raise ConfigError("changed_params needs a built-in family model")
        return ModelSpec(
            c=coeff_from_dict(block.c),
            g=coeff_from_dict(block.g),
            link=LinkFunction.from_dict((block.link or LinkBlock()).model_dump()),
            innovation=innov or InnovationDist(),
            nonnegative=block.nonnegative,
        )
    except ModelError as exc:
        raise ConfigError(f"model: {exc}") from None


def build_transform(block: TransformBlock) -> Transform:
    return Transform(block.kind, block.nu)
