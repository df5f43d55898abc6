"""Build script: compiles the optional Cython acquisition core.

The extension is optional.  When Cython or a C compiler is missing the
install still succeeds and the package falls back to the NumPy
implementation of the same kernels (see phasesweep.backend).

Build in place for development with:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "phasesweep._corekernels",
                ["src/phasesweep/_corekernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
