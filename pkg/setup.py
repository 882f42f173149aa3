import os

from setuptools import setup

ext_modules = []
if os.environ.get("CUMULUS_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/cumulus/tileproto/_kernels.pyx"],
            language_level=3,
        )
    except ImportError:
        # Pure-Python fallback is selected at import time; the extension
        # is an optimization, not a requirement.
        ext_modules = []

setup(ext_modules=ext_modules)
