# kamlab/config.py
from pydantic_settings import BaseSettings
import os
from dotenv import load_dotenv

load_dotenv()  # Load variables from `.env`

class Settings(BaseSettings):
    WORKERS: int = int(os.getenv("KAMLAB_WORKERS", "1"))
    LOG_LEVEL: str = os.getenv("KAMLAB_LOG_LEVEL", "INFO")
    DIVISOR_FLOOR: float = float(os.getenv("KAMLAB_DIVISOR_FLOOR", "1e-13"))
    ENUMERATION_BUDGET: int = int(os.getenv("KAMLAB_ENUMERATION_BUDGET", "50000000"))
    MAX_DPS: int = int(os.getenv("KAMLAB_MAX_DPS", "6000"))
    COMPOSE_OVERSAMPLE: int = int(os.getenv("KAMLAB_COMPOSE_OVERSAMPLE", "2"))
    INVERSION_MAX_ITER: int = int(os.getenv("KAMLAB_INVERSION_MAX_ITER", "60"))
    INVERSION_TOL: float = float(os.getenv("KAMLAB_INVERSION_TOL", "1e-14"))
    NEWTON_MAX_ITER: int = int(os.getenv("KAMLAB_NEWTON_MAX_ITER", "12"))
    FD_STEP: float = float(os.getenv("KAMLAB_FD_STEP", "1e-7"))
    FLAT_SIGN: str = os.getenv("KAMLAB_FLAT_SIGN", "plus")
    MAX_ORBIT_SAMPLES: int = int(os.getenv("KAMLAB_MAX_ORBIT_SAMPLES", "200000"))

    def numerics(self) -> dict:
        """Every setting that can change a numerical result; echoed and hashed with each report."""
        return {name: getattr(self, name) for name in NUMERIC_SETTINGS}


# worker count, log level and budgets never change a value that gets written
NUMERIC_SETTINGS = ("DIVISOR_FLOOR", "MAX_DPS", "COMPOSE_OVERSAMPLE", "INVERSION_MAX_ITER", "INVERSION_TOL",
                    "NEWTON_MAX_ITER", "FD_STEP", "FLAT_SIGN")

settings = Settings()
