from typing import List, Literal, Optional, Union
from pydantic import BaseModel, Field, model_validator

class DiophConfig(BaseModel):
    omega: Optional[List[float]] = None  # defaults to the model's omega0
    kappa: float = Field(default=1e-2, gt=0.0, lt=1.0)
    tau: float = Field(default=1.5, gt=0.0)
    N_check: int = Field(default=100, ge=1)
    N_list: List[int] = Field(default_factory=lambda: [10, 100, 1000])
    liouville_exponents: Optional[List[float]] = None  # build a Liouville pair instead

class BnfConfig(BaseModel):
    q: int = Field(default=4, ge=1)
    fourier_cutoff: Optional[int] = Field(default=None, ge=0)
    action_cutoff: Optional[int] = Field(default=None, ge=0)
    tol: float = Field(default=1e-10, gt=0.0)
    invariance_norm: float = Field(default=1e-2, gt=0.0)
    seed: Optional[int] = None

class DegeneracyConfig(BaseModel):
    q: int = Field(default=4, ge=1)
    tol: float = Field(default=1e-10, gt=0.0)
    k_list: List[List[int]] = Field(default_factory=list)
    p: int = Field(default=2, ge=0)

class IterateParams(BaseModel):
    kappa: float = Field(default=1e-2, gt=0.0)
    tau: float = Field(default=1.5, gt=0.0)
    h: float = Field(default=0.02, gt=0.0)
    q: int = Field(default=3, ge=1)
    tol: float = Field(default=1e-12, gt=0.0)
    n_max: int = Field(default=8, ge=0)
    fourier_cutoff: Optional[int] = Field(default=None, ge=0)

class DensityConfig(BaseModel):
    q: int = Field(default=4, ge=1)
    eta: float = Field(default=1e-2, gt=0.0)
    kappas: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    tau: float = Field(default=1.5, gt=0.0)
    N_check: int = Field(default=100, ge=1)
    samples: int = Field(default=2000, ge=1000)
    seed: Optional[int] = None
    frequency_source: Literal["normal_form", "counterterm"] = "normal_form"
    iterate: IterateParams = Field(default_factory=IterateParams)  # used by the counterterm source

class CountertermConfig(IterateParams):
    c: List[float] = Field(default_factory=list)
    omega: Optional[List[float]] = None  # defaults to d_r N^q(c)

class FreqmapConfig(IterateParams):
    c_grid: List[List[float]] = Field(default_factory=lambda: [[0.0, 0.0]])

class ToriConfig(IterateParams):
    c: List[float] = Field(default_factory=list)
    T: float = Field(default=100.0, gt=0.0)
    dt: float = Field(default=0.5, gt=0.0)
    samples: int = Field(default=10, ge=1)
    deviation_tol: float = Field(default=1e-6, gt=0.0)
    N_check: int = Field(default=1000, ge=1)
    seed: Optional[int] = None

class FamilyConfig(IterateParams):
    s_grid: List[Union[float, List[float]]] = Field(default_factory=lambda: [-1e-2, -5e-3, 5e-3, 1e-2])
    degeneracy_tol: float = Field(default=1e-10, gt=0.0)

class LiouvilleConfig(BaseModel):
    Q_n: int = Field(default=20, ge=1)
    gamma: float = Field(default=1.5, gt=0.0)
    q: int = Field(default=3, ge=1)
    tau: float = Field(default=1.5, gt=0.0)
    N_check: int = Field(default=100, ge=1)
    samples: int = Field(default=1000, ge=1000)
    radius: Optional[float] = Field(default=None, gt=0.0)
    seed: Optional[int] = None
    frequency_source: Literal["normal_form", "counterterm"] = "normal_form"
    iterate: IterateParams = Field(default_factory=IterateParams)

class StageSpec(BaseModel):
    eps: float = Field(..., gt=0.0)
    A: float = Field(..., gt=0.0)
    interval: int
    delta: float = Field(default=1.0, gt=0.0)

class DiffusionConfig(BaseModel):
    omega0: List[float] = Field(default_factory=lambda: [1.0, 0.6180339887498949, 0.4142135623730951, 0.5])
    cover_range: List[int] = Field(default_factory=lambda: [0, 5])
    growth: float = Field(default=2.0, gt=1.0)
    overlap: float = Field(default=0.1, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-3, gt=0.0)
    s: int = Field(default=2, ge=0)
    eta: float = Field(default=1e-4, gt=0.0, lt=1.0)
    exponents: List[float] = Field(default_factory=lambda: [6.0])
    gevrey_sigma: Optional[float] = Field(default=None, gt=1.0)
    stages: List[StageSpec] = Field(default_factory=lambda: [StageSpec(eps=1e-3, A=10.0, interval=3)])
    initial_points: List[List[float]] = Field(default_factory=list)
    A: float = Field(default=10.0, gt=0.0)
    T: Optional[float] = Field(default=None, gt=0.0)
    dt: Optional[float] = Field(default=None, gt=0.0)
    samples: int = Field(default=2001, ge=3)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def range_is_ordered(self):
        if len(self.cover_range) != 2 or self.cover_range[0] > self.cover_range[1]:
            raise ValueError("cover_range must be [lo, hi] with lo <= hi")
        if len(self.omega0) < 4:
            raise ValueError("the drift model needs at least four frequencies")
        return self
