from typing import List, Optional
from pydantic import BaseModel, Field

class SeriesTerm(BaseModel):
    n: List[int]
    alpha: List[int]
    re: float
    im: float = 0.0

class SeriesPayload(BaseModel):
    d: int = Field(..., ge=1)
    N: int = Field(..., ge=0)
    q: int = Field(..., ge=0)
    q_r: Optional[int] = Field(default=None, ge=0)  # centered series only
    terms: List[SeriesTerm] = Field(default_factory=list)
