#!/usr/bin/env python3
"""Script para verificar la instalación del entorno"""

import sys
import importlib

MIN_PYTHON = (3, 9)

# módulo importable -> versión mínima
DEPENDENCIES = {
    "numpy": "1.24",
    "scipy": "1.10",
    "pandas": "2.0",
    "sqlmodel": None,
    "tqdm": None,
    "dotenv": None,
    "pydantic": "2.5",
    "pydantic_settings": None,
    "pytest": None,
}


def _version_tuple(text):
    parts = []
    for piece in text.split(".")[:2]:
        digits = "".join(ch for ch in piece if ch.isdigit())
        parts.append(int(digits or 0))
    return tuple(parts)


def check_python_version():
    version = sys.version_info
    label = f"Python {version.major}.{version.minor}.{version.micro}"
    if version[:2] >= MIN_PYTHON:
        print(f"✅ {label}")
        return True
    print(f"❌ {label} - Se requiere {MIN_PYTHON[0]}.{MIN_PYTHON[1]}+")
    return False


def check_dependencies():
    all_ok = True
    for name, minimum in DEPENDENCIES.items():
        try:
            module = importlib.import_module(name)
        except ImportError:
            print(f"❌ {name} - No instalado")
            all_ok = False
            continue
        version = getattr(module, "__version__", "?")
        if minimum and version != "?" and _version_tuple(version) < _version_tuple(minimum):
            print(f"⚠️  {name} {version} - se recomienda >= {minimum}")
        else:
            print(f"✅ {name} {version}")
    return all_ok


def check_numerics():
    """Pequeño NNLS y asignación húngara para confirmar que scipy funciona"""
    try:
        import numpy as np
        from scipy.optimize import linear_sum_assignment, nnls

        x, _ = nnls(np.eye(2), np.array([1.0, -1.0]))
        rows, cols = linear_sum_assignment(-np.eye(3))
        ok = np.allclose(x, [1.0, 0.0]) and cols.tolist() == [0, 1, 2]
        print(f"{'✅' if ok else '❌'} scipy.optimize (nnls, linear_sum_assignment)")
        return bool(ok)
    except Exception as e:
        print(f"❌ scipy.optimize - {e}")
        return False


def check_config():
    """Verificar que config/settings.json se pueda cargar"""
    try:
        from src.utils.config import Settings
        cfg = Settings()
        cfg.load_from_json("config/settings.json")
        print(f"✅ config/settings.json (K={cfg.solver.budget}, d={cfg.synth.d}, "
              f"ventana={cfg.decontam.window_length}s)")
        return True
    except Exception as e:
        print(f"❌ config/settings.json - {e}")
        return False


def check_registry():
    """El registro de ejecuciones es opcional; solo se informa"""
    try:
        from src import database
        database.create_db_and_tables()
        print(f"✅ Registro de ejecuciones en {database.DATABASE_URL}")
    except Exception as e:
        print(f"⚠️  Registro de ejecuciones no disponible ({e}); usar --no-register")


def main():
    print("🔍 Verificando entorno de SparseEB-gMCR...\n")

    python_ok = check_python_version()
    print()
    deps_ok = check_dependencies()
    print()
    numerics_ok = check_numerics() if deps_ok else False
    config_ok = check_config() if deps_ok else False
    if config_ok:
        check_registry()

    print("\n" + "=" * 50)
    if python_ok and deps_ok and numerics_ok and config_ok:
        print("✅ ¡Entorno configurado correctamente!")
    else:
        print("❌ Hay problemas con la configuración")
        print("Ejecuta: pip install -r requirements.txt")


if __name__ == "__main__":
    main()
