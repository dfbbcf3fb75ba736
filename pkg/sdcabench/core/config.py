from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List


class Settings(BaseSettings):
    PROJECT_NAME: str = "SDCA Benchmark API"
    API_V1_STR: str = "/api/v1"

    # Output
    SDCA_OUTPUT_DIR: str = "./runs"
    LOG_LEVEL: str = "INFO"
    MAX_WORKERS: int = 4

    # Reference solutions
    REFERENCE_TOL: float = 1e-12
    REFERENCE_MAX_ITER: int = 1_000_000

    # Constrained prox
    BISECTION_MAX_ITER: int = 200
    BISECTION_TOL: float = 1e-10

    # GLM curvature grid over [-limit, limit]
    GLM_GRID_LIMIT: float = 50.0
    GLM_GRID_POINTS: int = 2001

    # A run is declared divergent once its objective exceeds this multiple of the start value
    DIVERGENCE_FACTOR: float = 1e12
    RATE_FIT_FLOOR: float = 1e-12

    # CORS
    BACKEND_CORS_ORIGINS: List[str] = ["http://localhost:3000"]

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", extra="ignore")


settings = Settings()
