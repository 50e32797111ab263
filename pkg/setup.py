"""Build the optional compiled kernels.

The package works without them: ``nervegraph.kernels`` falls back to the
pure-Python implementations when the extension cannot be imported.
"""
import os

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # build without the extension
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "nervegraph._kernels",
                sources=[os.path.join("src", "nervegraph", "_kernels.pyx")],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_9_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
