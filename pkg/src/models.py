# src/models.py
from typing import Optional, List
from datetime import datetime
from sqlmodel import Field, SQLModel, Relationship


class Run(SQLModel, table=True):
    """Una ejecución de un comando del CLI"""
    id: Optional[int] = Field(default=None, primary_key=True)
    command: str = Field(index=True)  # synth, fit, eval, bench, clean
    output_dir: str
    seed: int = 0
    status: str = Field(default="running")  # running, completed, failed
    exit_code: Optional[int] = None
    message: Optional[str] = None
    started_at: datetime = Field(default_factory=datetime.utcnow)
    finished_at: Optional[datetime] = None

    # Relaciones
    checkpoints: List["CheckpointRecord"] = Relationship(back_populates="run")
    bench_rows: List["BenchRecord"] = Relationship(back_populates="run")


class CheckpointRecord(SQLModel, table=True):
    """Checkpoint guardado por 'fit' (o por ventana en 'clean')"""
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="run.id")
    path: str
    iteration: int
    r2: Optional[float] = None
    ec: int
    is_best: bool = False
    window: Optional[int] = None

    run: Optional[Run] = Relationship(back_populates="checkpoints")


class BenchRecord(SQLModel, table=True):
    """Fila por método y réplica del benchmark"""
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="run.id")
    method: str = Field(index=True)
    n_true: int
    multiple: int
    snr_db: Optional[float] = None
    replicate: int
    ec: int
    r2: Optional[float] = None
    zero_leakage: Optional[float] = None

    run: Optional[Run] = Relationship(back_populates="bench_rows")
