"""Build script for the optional compiled enumeration kernel.

The package is pure Python except for enc.kernels._window, a Cython
extension that accelerates the budget-window lattice enumeration used by
candidate search.  If Cython or a C compiler is unavailable the build
falls back to the pure-Python implementation in enc.kernels._window_py;
the package selects whichever is importable at runtime.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that degrades to the pure-Python kernel on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            warnings.warn(f"compiled kernel unavailable ({exc}); "
                          f"falling back to pure-Python enumeration")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); "
                          f"falling back to pure-Python enumeration")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "enc.kernels._window",
        ["src/enc/kernels/_window.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
