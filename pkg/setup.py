"""Build script: compiles the step kernels when Cython and a C toolchain are
available, otherwise installs the pure-Python fallback only."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/rotorwalk/_kernel.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.extra_compile_args = ["-O3"]
except ImportError:
    print("Cython not available; building without the compiled kernel")

setup(ext_modules=ext_modules)
