from typing import List, Literal, Optional
from pydantic import BaseModel, Field, field_validator

class Witness(BaseModel):
    k: List[int]
    value: str  # |<k, omega>| as a decimal string, exact to the vector's precision
    bound: Optional[str] = None  # the bound the witness was built to beat

class FrequencyVector(BaseModel):
    omega: List[float] = Field(..., min_length=2)
    exact: Optional[List[str]] = None  # decimal expansions when the vector was constructed
    dps: int = Field(default=30, ge=15)
    witnesses: List[Witness] = Field(default_factory=list)

    def scaled(self, lam) -> "FrequencyVector":
        from kamlab.arithmetic.liouville import scale_frequency_vector

        return scale_frequency_vector(self, lam)

    @field_validator("exact")
    @classmethod
    def exact_matches_dimension(cls, v, info):
        omega = info.data.get("omega")
        if v is not None and omega is not None and len(v) != len(omega):
            raise ValueError("exact expansions must match the dimension of omega")
        return v

class DiophantineParams(BaseModel):
    kappa: float = Field(..., gt=0.0, lt=1.0)
    tau: float = Field(..., gt=0.0)
    N_check: int = Field(default=100, ge=1)

class SmallDivisor(BaseModel):
    N: int
    k: List[int]
    value: float

class DiophantineVerdict(BaseModel):
    diophantine: bool
    N_check: int
    witness: Optional[List[int]] = None
    value: Optional[float] = None
    bound: Optional[float] = None

class ExponentEstimate(BaseModel):
    gamma: float
    stderr: float
    residual: float
    N_list: List[int]
    m_star: List[float]

class LiouvilleSchedule(BaseModel):
    exponents: List[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0])
    variant: Literal["liouville", "super"] = "liouville"
    base: str = "1"  # first frequency, exact decimal
    anchor: Optional[str] = None  # value the second frequency should approximate
    start_digits: int = Field(default=1, ge=1)
    depth: Optional[int] = Field(default=None, ge=1)  # witness count, defaults to len(exponents)

class ResonancePick(BaseModel):
    k: List[int]
    value: str
    bound: str
    source: Literal["witness", "enumeration"]
