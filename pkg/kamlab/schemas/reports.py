from typing import Dict, List, Optional
from pydantic import BaseModel, Field

class IterationRecord(BaseModel):
    n: int
    h_n: float
    rho_n: float
    delta_n: float
    eps: float
    zeta: float
    eta: float
    nu: float
    ledger_norm: float
    lambda_norm: float = 0.0

class ContractionFit(BaseModel):
    ratios: List[float]  # eps_new / eps_old^2
    log_ratios: List[float]  # log eps_new / log eps_old
    constant: float
    spread: float  # max / min of the ratios

class ReportEnvelope(BaseModel):
    command: str
    version: str
    config_hash: str
    config: Dict
    checks: Dict[str, bool] = Field(default_factory=dict)
    result: Dict = Field(default_factory=dict)
    error: Optional[Dict] = None
