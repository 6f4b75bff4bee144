from setuptools import Extension, setup

import numpy
from Cython.Build import cythonize

ext = Extension(
    "accentor._kernels",
    ["src/accentor/_kernels.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3", "-ffast-math"],
)

setup(ext_modules=cythonize(ext, language_level=3))
