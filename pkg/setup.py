"""Build script: compiles the optional Cython kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so any failure here degrades to a source-only install.
"""

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/hirelp/_kernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
