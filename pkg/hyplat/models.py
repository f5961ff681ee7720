from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from hyplat import config

# Matrices and vectors travel as decimal strings; entries outgrow 64 bits.
StrVector = List[str]
StrMatrix = List[List[str]]


def encode_vector(v) -> StrVector:
    return [str(a) for a in v]


def encode_matrix(M) -> StrMatrix:
    return [encode_vector(row) for row in M]


def decode_matrix(M: StrMatrix) -> List[List[int]]:
    return [[int(a) for a in row] for row in M]


class JobSpec(BaseModel):
    matrix_path: Optional[str] = None
    matrix_text: Optional[str] = None
    graph_path: Optional[str] = None
    mode: Literal["direct", "watson", "auto"] = "auto"
    json_path: Optional[str] = None
    dot_path: Optional[str] = None
    summary: bool = True
    verify: bool = False
    orbit_budget: int = Field(default_factory=lambda: config.ORBIT_BUDGET)
    include_timings: bool = True

    @model_validator(mode="after")
    def exactly_one_source(self):
        sources = [s for s in (self.matrix_path, self.matrix_text, self.graph_path) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one of matrix_path, matrix_text, graph_path is required")
        return self


class Violation(BaseModel):
    kind: str
    detail: str


class VerificationReport(BaseModel):
    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str) -> None:
        self.violations.append(Violation(kind=kind, detail=detail))


class ClassReport(BaseModel):
    id: int
    vector: StrVector
    norm: str
    minimum: str
    num_minvecs: int
    num_directions: int
    num_neighbours: int
    stabilizer_order: Optional[int] = None
    stabilizer_generators: List[StrMatrix] = Field(default_factory=list)


class EdgeReport(BaseModel):
    source: int
    target: int
    label: Optional[str] = None
    element: Optional[StrMatrix] = None


class WatsonReport(BaseModel):
    applied: bool
    chain: List[int] = Field(default_factory=list)
    determinants: List[str] = Field(default_factory=list)
    basis: StrMatrix = Field(default_factory=list)
    gram: StrMatrix = Field(default_factory=list)
    orbit_size: Optional[int] = None


class AutReport(BaseModel):
    input: StrMatrix
    mode: str
    determinant: str
    traversed: StrMatrix
    classes: List[ClassReport] = Field(default_factory=list)
    edges: List[EdgeReport] = Field(default_factory=list)
    generators: List[StrMatrix] = Field(default_factory=list)
    minus_identity_included: bool = True
    watson: Optional[WatsonReport] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    verification: Optional[VerificationReport] = None

    @property
    def connecting_elements(self) -> int:
        return sum(1 for e in self.edges if e.element is not None)
