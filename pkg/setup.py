"""Build script for the optional compiled rasterization core.

The package is fully functional without the extension: tomo._kernels
falls back to a vectorized numpy implementation when the compiled
module is missing (or when TOMO_NO_NATIVE=1 is set).
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "tomo._kernels.native",
        ["src/tomo/_kernels/native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # No -ffast-math / -march: the fallback must reproduce the
        # compiled results bit for bit, so keep strict IEEE arithmetic.
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
