# src/utils/config.py
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import BaseModel, Field, field_validator
from typing import Optional, Tuple, List, Dict, Any
import json
from pathlib import Path


class SynthSettings(BaseSettings):
    """Generador sintético de componentes dispersos (SynthConfig)"""
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_SYNTH_")

    n_true: int = 16
    d: int = 256
    sparsity_ratio: float = 0.95
    dataset_multiple: int = 8
    conc_low: float = 10.0
    conc_high: float = 1000.0
    snr_db: Optional[float] = 30.0  # None = sin ruido
    active_per_sample: Tuple[int, int] = (2, 6)
    seed: int = 1

    @field_validator("sparsity_ratio")
    @classmethod
    def _ratio_range(cls, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError("sparsity_ratio debe estar en [0, 1)")
        return v

    @field_validator("conc_low")
    @classmethod
    def _conc_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("conc_low debe ser > 0")
        return v

    @property
    def n_samples(self) -> int:
        return self.dataset_multiple * self.n_true


class SolverSettings(BaseSettings):
    """Hiperparámetros del solver SparseEB-gMCR (HyperParams)"""
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_SOLVER_")

    budget: int = 64
    hidden: int = 256

    # Multiplicadores de la energía total
    lambda_prime: Optional[float] = None  # None = regla max(floor, per_dim * d)
    lambda_prime_floor: float = 1000.0
    lambda_prime_per_dim: float = 2.0
    lambda_e: float = 0.01
    lambda_amb: float = 0.01
    # Peso de las compuertas estáticas dentro de C (índices abiertos / d por componente)
    lambda_static: float = 1.0
    # False = EB-gMCR denso, sin compuerta estática
    static_gate: bool = True

    # Temperatura (recocido geométrico)
    tau_start: float = 1.0
    tau_end: float = 0.1

    # Adam
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    max_iters: int = 20000
    batch_size: int = 64
    checkpoint_interval: int = 1000
    log_interval: int = 100
    trend_window: int = 1000
    usage_threshold: float = 0.05
    seed: int = 0

    def resolve_lambda_prime(self, d: int) -> float:
        """λ′ explícito o escalado con la dimensión de los componentes"""
        if self.lambda_prime is not None:
            return float(self.lambda_prime)
        return max(self.lambda_prime_floor, self.lambda_prime_per_dim * d)

    def tau_at(self, iteration: int) -> float:
        """Temperatura en la iteración dada (decaimiento geométrico)"""
        if self.max_iters <= 1:
            return self.tau_end
        frac = min(max(iteration / (self.max_iters - 1), 0.0), 1.0)
        return self.tau_start * (self.tau_end / self.tau_start) ** frac


class BaselineSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_BASELINE_")

    nmf_iters: int = 2000
    mcr_als_iters: int = 200
    sparse_nmf_alpha: float = 0.1
    tol: float = 1e-10
    ridge: float = 1e-8


class DecontamSettings(BaseSettings):
    """Ventanas de RT y modo de limpieza (WindowPlan)"""
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_DECONTAM_")

    window_length: float = 60.0
    mode: str = "reconstruct"  # reconstruct | subtract
    quantize: bool = True
    report_channels: List[int] = Field(default_factory=lambda: [207, 281])

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, v: str) -> str:
        if v not in ("reconstruct", "subtract"):
            raise ValueError("mode debe ser 'reconstruct' o 'subtract'")
        return v


class BenchSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_BENCH_")

    methods: List[str] = Field(default_factory=lambda: ["sparse-eb-gmcr", "eb-gmcr", "nmf", "sparse-nmf", "mcr-als"])
    replicates: int = 5
    n_true: List[int] = Field(default_factory=lambda: [16])
    multiples: List[int] = Field(default_factory=lambda: [4, 8])
    snr_db: List[float] = Field(default_factory=lambda: [20.0, 30.0])


class OutputSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SPARSEMCR_OUTPUT_")

    float_format: str = "%.17g"
    progress: bool = True
    register_runs: bool = True


class Settings(BaseSettings):
    # App settings
    app_name: str = "SparseEB-gMCR"
    app_version: str = "1.0.0"
    debug: bool = False

    # Logging settings
    log_level: str = "INFO"
    log_file: str = "logs/app.log"

    # Registro de ejecuciones
    database_url: str = "sqlite:///./sparse_mcr_runs.db"

    # Directorio raíz de salidas (SPARSEMCR_OUTPUT_ROOT)
    output_root: str = "output"
    seed: int = 0
    workers: int = 1

    # Sub-settings
    synth: SynthSettings = SynthSettings()
    solver: SolverSettings = SolverSettings()
    baseline: BaselineSettings = BaselineSettings()
    decontam: DecontamSettings = DecontamSettings()
    bench: BenchSettings = BenchSettings()
    output: OutputSettings = OutputSettings()

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="SPARSEMCR_",
        case_sensitive=False,
        extra="allow",
    )

    def load_from_json(self, config_path: str = "config/settings.json"):
        """Cargar configuración desde archivo JSON"""
        path = Path(config_path)
        if path.exists():
            with open(path, 'r') as f:
                config_data = json.load(f)
            self.apply(config_data)

    def apply(self, config_data: Dict[str, Any]):
        """Actualizar secciones y campos a partir de un diccionario"""
        sections = {
            'synth': SynthSettings,
            'solver': SolverSettings,
            'baseline': BaselineSettings,
            'decontam': DecontamSettings,
            'bench': BenchSettings,
            'output': OutputSettings,
        }
        for key, value in config_data.items():
            if key in sections:
                merged = {**getattr(self, key).model_dump(), **value}
                setattr(self, key, sections[key](**merged))
            elif key in type(self).model_fields:
                setattr(self, key, value)


class RunConfig(BaseModel):
    """Configuración resuelta de una ejecución (se guarda junto a las salidas)"""
    command: str
    seed: int
    output_dir: str
    sections: Dict[str, Any] = Field(default_factory=dict)
    arguments: Dict[str, Any] = Field(default_factory=dict)


# Instancia global de configuración
settings = Settings()
settings.load_from_json()
