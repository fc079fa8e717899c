# src/utils/logger.py
import logging
import sys
from pathlib import Path
from src.utils.config import settings


def setup_logger(name: str = "sparse_mcr") -> logging.Logger:
    """Configurar y retornar un logger"""

    logger = logging.getLogger(name)

    # Evitar handlers duplicados si el módulo se recarga
    if logger.handlers:
        return logger

    log_level = getattr(settings, 'log_level', 'INFO')
    logger.setLevel(getattr(logging, log_level.upper()))
    logger.propagate = False

    # Formato
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Handler para consola
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if settings.debug else logging.INFO)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Handler para archivo (crea el directorio si no existe)
    log_file = Path(getattr(settings, 'log_file', "logs/app.log"))
    try:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        logger.warning(f"No se pudo abrir el archivo de log {log_file}: {e}")

    return logger


# Logger global
logger = setup_logger()
