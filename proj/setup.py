# SPDX-License-Identifier: Apache-2.0
"""CMake bridge so `pip install .` builds the C++ core and the extension."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        extdir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        import pybind11

        cmake_args = [
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={extdir}",
            f"-DPython_EXECUTABLE={sys.executable}",
            f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DPNMKIT_BUILD_TESTS=OFF",
            "-DPNMKIT_BUILD_PYTHON=ON",
        ]
        # multi-config generators keep per-config output dirs
        for config in ("RELEASE", "DEBUG"):
            cmake_args.append(f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY_{config}={extdir}")

        source_dir = Path(__file__).resolve().parent
        subprocess.run(["cmake", "-S", str(source_dir), "-B", str(build_dir)] + cmake_args,
                       check=True)
        jobs = os.environ.get("CMAKE_BUILD_PARALLEL_LEVEL", str(os.cpu_count() or 2))
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_pnmkit", "-j", jobs],
            check=True)


setup(
    ext_modules=[CMakeExtension("pnmkit._pnmkit")],
    cmdclass={"build_ext": CMakeBuild},
)
