from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="TG_")

    APP_NAME: str = Field("tgalaxy", description="Logger namespace and report producer name")
    LOG_DIR: str = Field("./data/logs", description="Directory for rotating logs and check audit files")
    LOG_LEVEL: str = Field("INFO", description="Level for the application logger")

    # Unrolling
    RAY_UNIT: int = Field(8, ge=1, description="Ray truncation unit L: explicit unrollings keep ray positions <= depth*L")
    MAX_DEPTH: int = Field(4096, ge=1, description="Cap for certified depth doubling in least-first search")
    SECTION_DEPTH: int = Field(4, ge=3, description="Reference unrolling depth used for section analysis")

    # Symbolic fitting
    FIT_START: int = Field(1, ge=0, description="First residue index sampled when fitting distance polynomials")
    SAMPLE_SPAN: int = Field(200, ge=1, description="Window of indices used when checking verdicts by sampling")

    # Brute-force oracle
    ORACLE_MAX_TIPS: int = Field(4, ge=0, description="Tip crossings allowed in oracle walks")
    ORACLE_MAX_STEPS: int = Field(12, ge=0, description="Branch steps allowed in oracle walks")

    # CLI
    DEFAULT_JOBS: int = Field(1, ge=1, description="Workers for the classify verdict matrix")
    COLOR: str = Field("auto", pattern="^(never|auto)$", description="ANSI colour control (TG_COLOR)")
    SEED: int = Field(0, description="Seed for randomized pair sampling")


settings = Settings()
