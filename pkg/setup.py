import os

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The kernel uses numpy's C random API, which lives in a static library
# shipped inside numpy rather than in the extension ABI.
npyrandom_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

extensions = [
    Extension(
        "hypercrit._kernels._core",
        ["src/hypercrit/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
