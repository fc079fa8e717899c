# src/database.py
from sqlmodel import create_engine, SQLModel, Session, select
from contextlib import contextmanager
from datetime import datetime
from typing import List, Optional
import os
from dotenv import load_dotenv

from src.models import Run
from src.utils.config import settings

load_dotenv()

# DATABASE_URL del entorno tiene prioridad sobre settings.database_url
DATABASE_URL = os.getenv("DATABASE_URL", settings.database_url)


def _make_engine(url: str):
    return create_engine(
        url,
        connect_args={"check_same_thread": False} if "sqlite" in url else {}
    )


engine = _make_engine(DATABASE_URL)


def use_database(url: str):
    """Apuntar el registro a otra base de datos (p.ej. en tests)"""
    global engine
    engine = _make_engine(url)
    create_db_and_tables()


def create_db_and_tables():
    """Crear todas las tablas en la base de datos"""
    SQLModel.metadata.create_all(engine)


@contextmanager
def get_session():
    """Context manager para manejar sesiones de base de datos"""
    session = Session(engine)
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def start_run(command: str, output_dir: str, seed: int) -> int:
    with get_session() as session:
        run = Run(command=command, output_dir=output_dir, seed=seed)
        session.add(run)
        session.flush()
        return run.id


def finish_run(run_id: int, exit_code: int, message: Optional[str] = None):
    with get_session() as session:
        run = session.get(Run, run_id)
        if run is None:
            return
        run.status = "completed" if exit_code == 0 else "failed"
        run.exit_code = exit_code
        run.message = message
        run.finished_at = datetime.utcnow()
        session.add(run)


def record(run_id: int, rows: List[SQLModel]):
    """Guardar filas asociadas a una ejecución"""
    with get_session() as session:
        for row in rows:
            row.run_id = run_id
            session.add(row)


def list_runs(limit: int = 20, command: Optional[str] = None) -> List[Run]:
    with Session(engine) as session:
        query = select(Run).order_by(Run.id.desc()).limit(limit)
        if command:
            query = query.where(Run.command == command)
        return list(session.exec(query).all())
