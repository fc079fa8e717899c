# setup.py
from setuptools import setup, find_packages

setup(
    name="sparse-eb-gmcr",
    version="1.0.0",
    description="Resolución multivariante de curvas generativa basada en energía con compuertas de dispersión",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=2.0.0",
        "sqlmodel>=0.0.14,<0.0.45",
        "tqdm>=4.66.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.5.0",
        "pydantic-settings>=2.1.0",
    ],
    entry_points={"console_scripts": ["sparse-mcr=src.main:main"]},
)
