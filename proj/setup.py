"""Builds the compiled extension with pybind11's setuptools helpers; project
metadata lives in pyproject.toml.  The CMake build produces the same module
for the test suite without touching this file."""

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "python/bindings.cpp",
    "src/lattice.cpp",
    "src/engine.cpp",
    "src/oracle.cpp",
    "src/stats.cpp",
    "src/estimators.cpp",
    "src/invariants.cpp",
    "src/report.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "operc._core",
            core_sources,
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
