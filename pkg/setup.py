"""Build script: compiles the optional search kernel extension.

The extension is marked optional; if Cython or a C compiler is missing the
install still succeeds and the pure-Python kernel is used at runtime.
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "tempmod._search_cy",
        ["src/tempmod/_search_cy.pyx"],
        language="c++",
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
