from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ---------------- Input documents ----------------

class MatrixPayload(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None  # absent means real

    @model_validator(mode="after")
    def _check_shape(self):
        for label, part in (("re", self.re), ("im", self.im)):
            if part is None:
                continue
            if len(part) != self.rows or any(len(row) != self.cols for row in part):
                raise ValueError(f"'{label}' must be {self.rows}x{self.cols}")
        return self


class SpectrumPayload(BaseModel):
    values: List[float]
    mults: List[int]


class StateFile(BaseModel):
    hbar: float = Field(default=1.0, gt=0)
    rho: MatrixPayload
    spectrum: Optional[SpectrumPayload] = None


class ObservableFile(BaseModel):
    observables: Dict[str, MatrixPayload]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=42, ge=0, lt=2 ** 64)
    trials: int = Field(default=1000, ge=1)
    dim_max: int = Field(default=8, ge=2)
    hbar: float = Field(default=1.0, gt=0)
    tol_scale: float = Field(default=1.0, gt=0)
    workers: int = Field(default=1, ge=1)
    out: Optional[str] = None


# ---------------- Reports ----------------

class Winner(str, Enum):
    GEOMETRIC = "geometric"
    ROBERTSON_SCHRODINGER = "robertson_schrodinger"
    TIE = "tie"


class Regime(str, Enum):
    # sign of 2{A,B}_g xiA_perp.xiB_perp + (xiA_perp.xiB_perp)^2
    GEOMETRIC_INTERPOLATES = "geometric_interpolates"
    ROBERTSON_SCHRODINGER_INTERPOLATES = "robertson_schrodinger_interpolates"
    EQUIVALENT = "equivalent"


class Classification(str, Enum):
    PARALLEL = "parallel"
    PERPENDICULAR = "perpendicular"
    GENERIC = "generic"


class BoundReport(BaseModel):
    expA: float
    expB: float
    dA: float
    dB: float
    rs_bound: float
    geo_bound: float
    combined_bound: float
    robertson_bound: float
    g_bracket: float
    w_bracket: float
    xiAperp_xiBperp: float
    xiAperp_sq: float
    xiBperp_sq: float
    difference_term: float
    regime: Regime
    winner: Winner
    hbar: float
    inputs: Dict[str, str] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @property
    def product(self) -> float:
        return self.dA * self.dB


class BoundsOutput(BaseModel):
    pairs: Dict[str, BoundReport]


class ClosedFormsReport(BaseModel):
    sxsy_omega: float
    sxsx_g: float
    xi_sz_perp_sq: float
    sz_exp: float


class EnsemblePayload(BaseModel):
    s: float
    m: List[float]
    p: List[float]
    eps: float
    hbar: float


class WindowReport(BaseModel):
    lower: float
    middle: float
    upper: float
    holds: bool


class SistaReport(BaseModel):
    lhs: float
    rhs: float
    holds: bool


class DemoReport(BaseModel):
    spec: EnsemblePayload
    closed_forms: ClosedFormsReport
    machine_forms: ClosedFormsReport
    pairs: Dict[str, BoundReport]
    sista: SistaReport
    window: WindowReport
    predicted_winners: bool


class SuiteResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    passed: int = Field(default=0, serialization_alias="pass")
    failed: int = Field(default=0, serialization_alias="fail")
    worst_residual: float = 0.0
    gating: bool = True

    @property
    def ok(self) -> bool:
        return self.failed == 0


class VerifySummary(BaseModel):
    config: RunConfig
    suites: Dict[str, SuiteResult]
    all_passed: bool


class EvolutionReport(BaseModel):
    times: List[float]
    expectations: Dict[str, List[float]]
    residuals: Dict[str, List[float]]
    max_residual: float
    max_drift: float
    ok: bool


class ErrorResponse(BaseModel):
    success: bool = False
    message: str
    error_code: Optional[str] = None
