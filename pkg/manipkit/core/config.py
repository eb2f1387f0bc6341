from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    SEED: int = 0

    LOG_LEVEL: str = "INFO"
    DEBUG: bool = False

    MASK_THRESHOLD: int = 127  # luminance > threshold is foreground

    FILTER_VALUE: float = 0.1
    BLUR_SIGMA: float = 1.0
    BLUR_RADIUS: int = 2  # 5x5 kernel
    NORMAL_QUANTIZATION: int = 2
    RELAXED_BBOX: bool = False

    GATE_THRESHOLD: float = 0.5

    SUBSTEP: float = 0.005
    ONE_STEP_LENGTH: float = 0.18
    MULTI_STEP_COUNT: int = 7
    MULTI_STEP_LENGTH: float = 0.05

    BENCH_WORKERS: int = 1
    DEFAULT_TRIALS: int = 1

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="MANIPKIT_",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
