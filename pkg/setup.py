import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CTXSAL_PURE"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ctxsal._kernels._native",
                    ["src/ctxsal/_kernels/_native.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython/compiler: the package still works on the pure-Python kernels.
        ext_modules = []

setup(ext_modules=ext_modules)
