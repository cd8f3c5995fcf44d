"""Build shim: compiles the SGNS inner-loop extension when Cython is available.

The package works without the extension (a pure NumPy kernel is selected at
import time), so a failed compile is not fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/crossera/embeddings/_sgns_inner.pyx"],
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
except ImportError:
    pass

setup(ext_modules=ext_modules)
