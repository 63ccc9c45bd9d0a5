from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True)

    PROJECT_NAME: str = "Gridfreq"

    # Dataset padrão (frota sintética de Gran Canaria)
    FLEET_CONFIG: str = "config/fleet.yaml"

    # Saídas (CSV, YAML, matrizes de plot)
    OUTPUT_DIR: str = "output"

    LOG_LEVEL: str = "INFO"

    # Unit commitment (branch-and-bound)
    UC_NODE_BUDGET: int = 200_000
    UC_GAP_TARGET: float = 0.01

    # Simulação dinâmica
    SIM_DT: float = 0.001
    SIM_T_END: float = 300.0
    SIM_SAMPLE_INTERVAL: float = 0.01

    # Varredura de cenários
    SWEEP_JOBS: int = 1


settings = Settings()
