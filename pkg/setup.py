# Builds the optional compiled trellis kernel.  The package works without it
# (a NumPy fallback is selected at import time), so any build failure here
# degrades to a pure-Python install instead of aborting.
#
# In-place build for running tests from a checkout:
#   python setup.py build_ext --inplace

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "shorteq._viterbi_cy",
                ["src/shorteq/_viterbi_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
