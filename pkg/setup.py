"""Build script for the optional compiled SpMM kernel.

The package works without the extension (a vectorized numpy fallback is
selected at import time); building it just makes the sparse block products
faster.  ``pip install -e . --no-build-isolation`` compiles it in place.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - source builds always have cython
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("mateq._spmm", ["src/mateq/_spmm.pyx"])],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
