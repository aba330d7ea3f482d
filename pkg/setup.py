"""
Package setup for the selo-qr command-line tool
"""
from pathlib import Path

from setuptools import find_packages, setup

here = Path(__file__).parent
requirements = [
    line.split("#", 1)[0].strip()
    for line in (here / "requirements.txt").read_text(encoding="utf-8").splitlines()
    if line.split("#", 1)[0].strip() and not line.startswith("pytest")
]

setup(
    name="selo-qr",
    version="0.3.0",
    description="Sparse quantile regression with the seamless-L0 penalty",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7.4.0"]},
    entry_points={"console_scripts": ["selo-qr = src.main:main"]},
)
