"""Scenario files: a strict JSON schema and its conversion to model objects.

Firm, country and category indices in scenario files are 1-based; everything
is converted to the 0-based library convention here.
"""
from __future__ import annotations

import difflib
import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .economy import EconomySpec, ProductivityModel, uniform_network
from .errors import ModelError
from .partitions import DEFAULT_PARTITION_CAP, canonical, islands
from .policy import TradePolicy, _cross_pair
from .replicate import ReplicateGame, build_clustered_network, replicate_game
from .risk import DEFAULT_LINK_CAP, RiskModel, build_risk_matrix


class ScenarioError(ModelError):
    """Scenario file is missing, malformed or violates the model's invariants."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProductivityBlock(_Strict):
    kind: Literal["constant", "hicks_neutral", "power"] = "constant"
    base: Union[float, list[float]] = 1.0
    theta: float = 0.0


class ReplicateBlock(_Strict):
    n: int = Field(ge=1)
    partition: Optional[list[list[int]]] = None


class RiskBlock(_Strict):
    kind: Literal["min", "sum"] = "min"
    spatial: Literal["homogeneous", "distance", "distance_category"] = "homogeneous"
    r: float = Field(ge=0.0, le=1.0)
    rho: float = Field(ge=0.0, lt=1.0)
    link_cap: int = Field(default=DEFAULT_LINK_CAP, ge=1)


class PolicyBlock(_Strict):
    level: Literal["country", "firm"] = "country"
    prevented: list[tuple[int, int]] = Field(default_factory=list)
    catalyzed: list[tuple[int, int]] = Field(default_factory=list)


class Options(_Strict):
    tol: float = Field(default=1e-9, gt=0)
    epsilon: float = Field(default=1e-3, gt=0, lt=1)
    tie_policy: Literal["uniform_over_argmax", "keep_current", "lowest_index"] = "keep_current"
    seed: int = 0
    max_rounds: int = Field(default=100, ge=1)
    schedule: Literal["round_robin", "random"] = "round_robin"
    random_starts: int = Field(default=0, ge=0)
    n_cap: int = Field(default=DEFAULT_PARTITION_CAP, ge=1)
    verify_instances: int = Field(default=20, ge=0)


class ScenarioModel(_Strict):
    name: str = "scenario"
    categories: list[int]
    consumption_shares: list[float]
    requirements: list[list[float]]
    network: Optional[list[list[float]]] = None
    productivity: ProductivityBlock = ProductivityBlock()
    replicate: Optional[ReplicateBlock] = None
    risk: Optional[RiskBlock] = None
    policy: Optional[PolicyBlock] = None
    options: Options = Options()

    @field_validator("consumption_shares")
    @classmethod
    def _shares_sum(cls, v):
        if abs(sum(v) - 1.0) > 1e-12:
            raise ValueError(f"shares sum to {sum(v):.15g}, expected 1")
        return v

    @model_validator(mode="after")
    def _shapes(self):
        m = len(self.consumption_shares)
        if len(self.categories) != m or len(self.requirements) != m:
            raise ValueError(
                f"categories ({len(self.categories)}), consumption_shares ({m}) and requirements "
                f"({len(self.requirements)}) must list the same firms"
            )
        return self


def _allowed_keys(model: type[BaseModel]) -> list[str]:
    return list(model.model_fields)


_NESTED = {
    "productivity": ProductivityBlock,
    "replicate": ReplicateBlock,
    "risk": RiskBlock,
    "policy": PolicyBlock,
    "options": Options,
}


# common notation for top-level fields
_ALIASES = {
    "lambda": "productivity",
    "a0": "consumption_shares",
    "b": "requirements",
    "A": "network",
    "epsilon": "options.epsilon",
    "tol": "options.tol",
    "seed": "options.seed",
}


def _suggest(loc: tuple, key: str) -> str:
    model = ScenarioModel
    vocabulary = {k: k for k in _allowed_keys(model)}
    if len(loc) > 1 and loc[0] in _NESTED:
        vocabulary = {k: k for k in _allowed_keys(_NESTED[loc[0]])}
    else:
        vocabulary.update(_ALIASES)
    close = difflib.get_close_matches(key, list(vocabulary), n=1)
    return f" (did you mean {vocabulary[close[0]]!r}?)" if close else ""


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = tuple(e["loc"])
        path = ".".join(str(p) for p in loc) or "<root>"
        if e["type"] == "extra_forbidden":
            lines.append(f"{path}: unknown key{_suggest(loc, str(loc[-1]))}")
        else:
            lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def parse_scenario(data: dict) -> "Scenario":
    try:
        model = ScenarioModel.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_errors(err)) from None
    return Scenario(model)


def load_scenario(path) -> "Scenario":
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}: invalid JSON ({err})") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return parse_scenario(data)


class Scenario:
    """Validated scenario with lazily built model objects."""

    def __init__(self, model: ScenarioModel):
        self.model = model
        self.options = model.options
        try:
            self.base = self._build_base()
            self.rep: Optional[ReplicateGame] = replicate_game(self.base, model.replicate.n) if model.replicate else None
        except ModelError as err:
            raise ScenarioError(str(err)) from None

    @property
    def name(self) -> str:
        return self.model.name

    def _build_base(self) -> EconomySpec:
        p = self.model.productivity
        prod = ProductivityModel(p.kind, np.asarray(p.base, dtype=float), p.theta)
        return EconomySpec(
            np.asarray(self.model.consumption_shares, dtype=float),
            np.asarray(self.model.requirements, dtype=float),
            np.asarray(self.model.categories, dtype=int),
            prod,
        )

    @property
    def econ(self) -> EconomySpec:
        return self.rep.econ if self.rep is not None else self.base

    @property
    def partition(self):
        if self.rep is None:
            return None
        q = self.model.replicate.partition
        if q is None:
            return islands(self.rep.n)
        try:
            return canonical([[c - 1 for c in block] for block in q], self.rep.n)
        except ModelError as err:
            raise ScenarioError(f"replicate.partition: {err}") from None

    def network(self) -> np.ndarray:
        if self.model.network is not None:
            A = np.asarray(self.model.network, dtype=float)
            if A.shape != (self.econ.m, self.econ.m):
                raise ScenarioError(f"network: shape {A.shape}, expected {(self.econ.m, self.econ.m)}")
            return A
        if self.rep is not None:
            return build_clustered_network(self.rep, self.partition).network
        return uniform_network(self.econ)

    def risk_model(self) -> Optional[RiskModel]:
        r = self.model.risk
        if r is None:
            return None
        if self.rep is not None:
            mat = build_risk_matrix(self.rep, r.spatial, r.r)
        elif r.spatial == "homogeneous":
            mat = np.full((self.econ.m, self.econ.m), r.r)
        else:
            raise ScenarioError("risk.spatial: distance risk needs a replicate block")
        return RiskModel(mat, r.rho, r.kind)

    def trade_policy(self) -> Optional[TradePolicy]:
        p = self.model.policy
        if p is None:
            return None
        if self.rep is None:
            raise ScenarioError("policy: trade policies need a replicate block")
        m, n = self.econ.m, self.rep.n

        def convert(pairs, field):
            out = []
            for a, b in pairs:
                top = n if p.level == "country" else m
                if not (1 <= a <= top and 1 <= b <= top):
                    raise ScenarioError(f"policy.{field}: index pair ({a}, {b}) outside 1..{top}")
                if p.level == "firm":
                    out.append((a - 1, b - 1))
                else:
                    src, dst = _cross_pair(self.rep)
                    out.append((self.rep.firm(src, a - 1), self.rep.firm(dst, b - 1)))
            return out

        try:
            return TradePolicy(frozenset(convert(p.prevented, "prevented")), frozenset(convert(p.catalyzed, "catalyzed")))
        except ScenarioError:
            raise
        except ModelError as err:
            raise ScenarioError(f"policy: {err}") from None

    def with_overrides(self, **overrides) -> "Scenario":
        opts = {k: v for k, v in overrides.items() if v is not None}
        if not opts:
            return self
        data = self.model.model_dump()
        data["options"].update(opts)
        return parse_scenario(data)


def json_schema() -> dict:
    return ScenarioModel.model_json_schema()
