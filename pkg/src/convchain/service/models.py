"""Request/response schemas of the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..ensemble import Constraint, EnsembleParams


class ParamsModel(BaseModel):
    """Wire form of EnsembleParams."""

    kind: Literal["endpoint", "length", "mixed"]
    z1: Optional[float] = None
    z2: Optional[float] = None
    z: Optional[float] = None
    y: Optional[float] = None
    lam: float = 1.0
    truncation_tolerance: float = 1e-12

    def to_params(self) -> EnsembleParams:
        if self.kind == "endpoint":
            if self.z1 is None:
                raise ValueError("endpoint kind needs z1 (z2 defaults to z1)")
            return EnsembleParams.endpoint(
                self.z1, self.z2, lam=self.lam,
                truncation_tolerance=self.truncation_tolerance,
            )
        if self.kind == "length":
            if self.z is None:
                raise ValueError("length kind needs z")
            return EnsembleParams.length(
                self.z, lam=self.lam,
                truncation_tolerance=self.truncation_tolerance,
            )
        if self.y is None or self.z is None:
            raise ValueError("mixed kind needs y and z")
        return EnsembleParams.mixed(
            self.y, self.z, truncation_tolerance=self.truncation_tolerance,
        )

    @staticmethod
    def from_params(p: EnsembleParams) -> "ParamsModel":
        return ParamsModel(
            kind=p.kind, z1=p.z1 or None, z2=p.z2 or None, z=p.z or None,
            y=p.y or None, lam=p.lam,
            truncation_tolerance=p.truncation_tolerance,
        )


class ConstraintModel(BaseModel):
    endpoint: Optional[tuple[int, int]] = None
    vertices: Optional[int] = None
    length: Optional[tuple[float, float]] = None

    def to_constraint(self) -> Constraint:
        return Constraint(endpoint=self.endpoint, vertices=self.vertices,
                          length=self.length)


class CountExactRequest(BaseModel):
    n1: int = Field(ge=0)
    n2: int = Field(ge=0)
    budget: int = 60


class CountExactResponse(BaseModel):
    n1: int
    n2: int
    counts: dict[str, str]
    total: str
    max_vertices: int


class CountEstimateRequest(BaseModel):
    n1: int = Field(ge=0)
    n2: int = Field(ge=0)
    vertices: int = Field(ge=0)
    params: ParamsModel
    replicas: int = 100_000
    seed: int = 0
    threads: int = 1


class CountEstimateResponse(BaseModel):
    estimate: float
    standard_error: float
    hits: int
    replicas: int
    log_prefactor: float
    zero_hits: bool
    upper_bound: Optional[float] = None


class SweepModel(BaseModel):
    start: float
    stop: float
    points: int = Field(ge=2)
    log: bool = True


class ConstantsRequest(BaseModel):
    lam: Optional[float] = None
    sweep: Optional[SweepModel] = None


class ConstantsRow(BaseModel):
    lam: float
    delta: float
    c: float
    e: float
    c_j: float
    e_j: float


class ConstantsResponse(BaseModel):
    rows: list[ConstantsRow]
    max_vertices_constant: float


class CalibrateRequest(BaseModel):
    kind: Literal["endpoint", "length", "mixed"]
    n: int = Field(ge=1)
    lam: Optional[float] = None
    c: Optional[float] = None
    s: Optional[float] = None
    L: Optional[float] = None
    refine: bool = True
    truncation_tolerance: float = 1e-12


class MomentsModel(BaseModel):
    expected_endpoint: tuple[float, float]
    expected_vertices: float
    expected_length: float
    truncation_bound: float


class CalibrateResponse(BaseModel):
    params: ParamsModel
    moments: MomentsModel


class MomentsRequest(BaseModel):
    params: ParamsModel


class MomentsResponse(MomentsModel):
    support_size: int
    neglected_activation_mass: float


class SampleRequest(BaseModel):
    params: ParamsModel
    seed: int = 0
    count: int = Field(default=1, ge=1, le=10_000)
    constraint: Optional[ConstraintModel] = None
    window: Optional[float] = None
    max_attempts: int = 10_000_000


class SampleItem(BaseModel):
    vertex_map: dict[str, int]
    chain: list[tuple[int, int]]
    endpoint: tuple[int, int]
    vertex_count: int
    euclidean_length: float
    attempts: Optional[int] = None
    offsets: Optional[dict] = None


class SampleResponse(BaseModel):
    samples: list[SampleItem]


class ShapeRequest(BaseModel):
    kind: Literal["parabola", "circle", "family"]
    L: Optional[float] = None
    points: int = Field(default=10_001, ge=2, le=400_000)


class ShapeResponse(BaseModel):
    kind: str
    nominal_length: float
    param: Optional[float] = None
    arc_length: float
    points: list[tuple[float, float]]


class JarnikRequest(BaseModel):
    lam: float = 1.0


class JarnikResponse(BaseModel):
    lam: float
    c: float
    e: float
    c_j: float
    e_j: float
    max_vertices_constant_j: float


class RandomModelRequest(BaseModel):
    k: int = Field(ge=1)
    trials: int = Field(default=1_000_000, ge=10_000)
    seed: int = 0


class RandomModelResponse(BaseModel):
    k: int
    trials: int
    estimate: float
    standard_error: float
    exact: float


class DBoundResponse(BaseModel):
    d: float


class AngularRequest(BaseModel):
    params: ParamsModel
    sector_edges: list[float]


class AngularResponse(BaseModel):
    masses: list[float]
