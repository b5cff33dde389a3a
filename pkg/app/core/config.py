# app/core/config.py
from pydantic_settings import BaseSettings
from typing import List


class Settings(BaseSettings):
    """Application settings"""

    APP_NAME: str = "Likelihood Evidence API"
    VERSION: str = "1.0.0"

    # Database (monitored trials)
    DATABASE_URL: str = "sqlite:///./evidence.db"

    # CORS
    ALLOWED_ORIGINS: str = "http://localhost:5173,http://localhost:3000"

    # Server
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Simulation
    EVIDENCE_SEED: int = 20240101
    DEFAULT_REPLICATES: int = 100_000
    SIM_WORKERS: int = 1

    # Manifest timestamp (Unix seconds) when SOURCE_DATE_EPOCH is unset
    MANIFEST_EPOCH: int = 0

    # Overshoot constants for discrete-time boundary crossing
    RHO_NORMAL: float = 0.583
    RHO_BINOMIAL: float = 0.32

    @property
    def cors_origins(self) -> List[str]:
        return [origin.strip() for origin in self.ALLOWED_ORIGINS.split(",")]

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


settings = Settings()
