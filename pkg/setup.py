"""Build the optional Cython simulation kernel.

The package works without it; ``mmpert.kernel`` falls back to the numpy
implementation when the extension cannot be imported.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    cythonize = None


class OptionalBuildExt(build_ext):
    """Do not fail the install when no compiler is available."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: Cython kernel not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: failed to build {ext.name} ({exc}); using numpy fallback")


ext_modules = []
if cythonize is not None and not os.environ.get("MMPERT_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "mmpert._ckernel",
                ["src/mmpert/_ckernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
