"""Build script: compiles the optional extension core for the stepper.

The package works without the extension (a numpy fallback is selected at
import time), so any build failure here downgrades to a pure-Python
install instead of aborting.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, cython, headers, ...
            warnings.warn(f"extension build skipped ({exc}); "
                          "using pure-Python stepper kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); "
                          "using pure-Python stepper kernels")


def extensions():
    import os
    if not os.path.exists("src/shockstab/_core/_stepper.pyx"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    exts = [
        Extension(
            "shockstab._core._stepper",
            ["src/shockstab/_core/_stepper.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ]
    return cythonize(exts, language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
