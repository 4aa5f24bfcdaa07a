import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ttcs.curve._fast",
                ["src/ttcs/curve/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython: the package still works on the pure-Python backend.
    print("warning: Cython unavailable, building without the compiled core",
          file=sys.stderr)

setup(ext_modules=ext_modules)
