"""Build script: compiles the Cython kernel extension when possible.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install.
Set FGPSIM_NO_EXT=1 to skip the extension build explicitly.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FGPSIM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "fgpsim.kernels._core",
                    ["src/fgpsim/kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    # -O2 without -ffast-math: keep float ops in source order so
                    # the compiled backend matches the numpy fallback bitwise.
                    extra_compile_args=["-O2"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"fgpsim: skipping Cython extension ({exc}); using pure-Python kernels")
        ext_modules = []

setup(ext_modules=ext_modules)
