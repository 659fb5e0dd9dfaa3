"""Build script: compiles the optional Cython sampling kernel.

The package works without the extension (a pure-numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install rather
than aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gibbsforge._kernels",
                sources=["src/gibbsforge/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # noqa: BLE001 - any build-env problem means "no extension"
    import sys

    print(f"gibbsforge: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules, zip_safe=False)
