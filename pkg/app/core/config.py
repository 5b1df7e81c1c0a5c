"""
Configuration Management
Environment-based configuration using Pydantic Settings
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings (env prefix GLMSEL_)"""

    model_config = SettingsConfigDict(
        env_prefix="GLMSEL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Parallelism (GLMSEL_THREADS overrides the CLI default)
    threads: int = 1

    # Fit cache
    cache_capacity: int = 100_000

    # Guards
    enumeration_limit: int = 100_000

    # Reports
    report_path: str = "glmsel_report.json"
    top_k: int = 20

    # Monte-Carlo oracle
    mc_draws: int = 10_000


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get application settings"""
    return settings
