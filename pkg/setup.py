import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "squarebox.kernels._fast",
                ["src/squarebox/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # No Cython at build time: the package falls back to the numpy kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
