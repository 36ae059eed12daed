"""CMake-driven build of the _fairdec extension.

The wheel carries the compiled pybind11 module next to the pure-python
package under python/fairdec.
"""

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
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        source_dir = Path(__file__).resolve().parent
        cfg = "Debug" if self.debug else "Release"
        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={cfg}",
            f"-DFAIRDEC_EXT_OUTPUT_DIR={out_dir}",
            "-DFAIRDEC_BUILD_TESTS=OFF",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(
            ["cmake", "-S", str(source_dir), "-B", str(build_dir), *cmake_args],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_fairdec",
             "--parallel", str(os.cpu_count() or 1)],
            check=True,
        )


setup(
    packages=["fairdec"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("fairdec._fairdec")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
