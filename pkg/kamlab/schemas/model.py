from typing import Any, Dict, List, Literal, Optional
from pydantic import BaseModel, Field, model_validator
from kamlab.schemas.series import SeriesPayload

class WeightSpec(BaseModel):
    rho: float = Field(default=0.1, gt=0.0)
    delta: float = Field(default=1.0, gt=0.0)

class ModelFile(BaseModel):
    kind: Literal["hamiltonian", "drift"] = "hamiltonian"
    d: int = Field(..., ge=2)
    omega0: List[float]
    hamiltonian: Optional[SeriesPayload] = None
    preset: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    N: Optional[int] = Field(default=None, ge=0)  # Fourier workspace cutoff
    q: Optional[int] = Field(default=None, ge=0)  # degree workspace cutoff
    weights: WeightSpec = Field(default_factory=WeightSpec)

    @model_validator(mode="after")
    def shape_is_consistent(self):
        if len(self.omega0) != self.d:
            raise ValueError(f"omega0 has {len(self.omega0)} entries, expected d={self.d}")
        if self.hamiltonian is not None and self.hamiltonian.d != self.d:
            raise ValueError(f"hamiltonian.d={self.hamiltonian.d} disagrees with d={self.d}")
        if self.kind == "hamiltonian" and self.hamiltonian is None and self.preset is None:
            raise ValueError("a hamiltonian or a preset name is required")
        return self
