import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [
            Extension(
                "qtheta._kernels._fastsum",
                ["src/qtheta/_kernels/_fastsum.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython: install pure-Python; the kernel backend falls back at import
    ext_modules = []

setup(ext_modules=ext_modules)
