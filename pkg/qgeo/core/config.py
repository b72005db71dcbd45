import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

# Load environment variables from a .env file in the project root, if present
load_dotenv()


class Tolerances(BaseModel):
    """Every numeric tolerance used by the toolkit, in one record.

    Absolute unless the field comment says relative; "scale" factors are applied
    by the caller where a check depends on operand size.
    """

    model_config = ConfigDict(frozen=True)

    herm: float = 1e-12  # relative, ||M - M^H|| / ||M||
    eig: float = 1e-10  # eigensystem reconstruction, times max(1, ||M||)
    spec: float = 1e-9  # eigenvalues vs declared spectrum
    trace: float = 1e-12
    psd: float = 1e-12
    frame: float = 1e-10  # psi^H psi = P
    unitary: float = 1e-10
    gauge: float = 1e-12  # relative
    tangent: float = 1e-10  # relative
    identity: float = 1e-8
    bound: float = 1e-9
    tie: float = 1e-12
    classify: float = 1e-9
    fd_step: float = 1e-5
    fd: float = 1e-5
    evolve_residual: float = 1e-4
    drift: float = 1e-9
    closed_form: float = 1e-9

    def scaled(self, factor: float) -> "Tolerances":
        if factor <= 0:
            raise ValueError("tolerance scale must be positive")
        values = {
            name: (value if name == "fd_step" else value * factor)
            for name, value in self.model_dump().items()
        }
        return Tolerances(**values)


DEFAULT_TOLERANCES = Tolerances()


class Settings:
    # Numerics
    TOL_SCALE = float(os.getenv("QGEO_TOL_SCALE", "1"))
    HBAR = float(os.getenv("QGEO_HBAR", "1"))

    # Verification campaigns
    SEED = int(os.getenv("QGEO_SEED", "42"))
    TRIALS = int(os.getenv("QGEO_TRIALS", "1000"))
    DIM_MAX = int(os.getenv("QGEO_DIM_MAX", "8"))
    SECOND_HBAR = 0.32

    # Logging
    LOG_LEVEL = os.getenv("QGEO_LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("QGEO_LOG_FILE")

    PROJECT_NAME = "qgeo"
    VERSION = "1.0.0"

    def tolerances(self, scale: Optional[float] = None) -> Tolerances:
        return DEFAULT_TOLERANCES.scaled(self.TOL_SCALE if scale is None else scale)


# Create settings instance
settings = Settings()
