"""Pydantic request/response models for the recovery service."""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict

Matrix = List[List[float]]


class ProblemModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int
    scenario: Literal["exact", "two-space", "l2", "mixed", "l1"]
    Lambda: Matrix
    Q: Matrix
    R: Optional[Matrix] = None
    S: Optional[Matrix] = None
    V: Optional[Matrix] = None
    W: Optional[Matrix] = None
    Sprime: Optional[Matrix] = None
    Sdoubleprime: Optional[Matrix] = None
    epsilon: float = 1.0
    eta: float = 1.0
    tol: float = 1e-9
    seed: int = 42

    def document(self):
        doc = self.model_dump()
        return {k: v for k, v in doc.items() if v is not None}


class MapModel(BaseModel):
    D: Matrix
    QD: Matrix
    kind: str
    interpolating: bool


class L1Block(BaseModel):
    verdict: Literal["Holds", "BestEffort"]
    k: int
    lb_prime: List[float]
    M_column: List[float]
    condition_margin: float
    upper_sq: float
    M_table: Optional[Matrix] = None


class ResidualsModel(BaseModel):
    psd_residual: float
    tau_tolerance: float
    interpolation: Optional[float] = None


class ExtremalModel(BaseModel):
    h_ambient: List[float]
    a_seminorm: float
    b_seminorm: float
    stationarity_residual: float


class OracleReportModel(BaseModel):
    oracle_value: float
    certificate_value: float
    gap: float
    sound: bool
    method: str
    samples: int
    seed: int
    budget: int


class CertificateModel(BaseModel):
    tool: str
    version: str
    input_hash: str
    scenario: str
    radius_sq: float
    a_sharp: float
    b_sharp: float
    tau_sharp: float
    c_sharp: Optional[float] = None
    d_sharp: Optional[float] = None
    map: MapModel
    l1: Optional[L1Block] = None
    residuals: ResidualsModel
    extremal: Optional[ExtremalModel] = None
    oracle: Optional[OracleReportModel] = None


class RadiusRequest(BaseModel):
    problem: ProblemModel
    full_m_table: bool = False


class ApplyRequest(BaseModel):
    certificate: CertificateModel
    y: List[float]


class ApplyResponse(BaseModel):
    f_hat: List[float]
    q_hat: List[float]


class OracleRequest(BaseModel):
    problem: ProblemModel
    certificate: CertificateModel
    budget: int = 10_000
    seed: Optional[int] = None


class MinimaxRequest(BaseModel):
    problem: ProblemModel
    iters: int = 80


class MinimaxResponse(BaseModel):
    value: float
    D: Matrix
    accepted_values: List[float]
    hit_max_iterations: bool
    condition_verdict: str
    lb_max: float
    upper_start: float


class SdpaRequest(BaseModel):
    problem: ProblemModel


class SdpaResponse(BaseModel):
    text: str


class DiagnoseRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int
    Lambda: Matrix
    Q: Matrix
    Rs: List[Matrix]
    tol: float = 1e-4


class DiagnoseResponse(BaseModel):
    verdict: Literal["Exact", "NotExact"]
    value: float
    coefficients: List[float]
    seminorms: List[float]


class HealthResponse(BaseModel):
    status: str
    version: str
