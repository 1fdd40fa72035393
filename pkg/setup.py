"""Build script for the optional compiled stepping kernel.

The package works without the extension (the pure-numpy backend implements
the same contract); a failed compile therefore degrades instead of aborting
the install.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "etdispatch._kernel_cy",
                ["src/etdispatch/_kernel_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
