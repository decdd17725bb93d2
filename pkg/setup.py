"""Build shim for the optional compiled kernel extension.

The package is fully functional without the extension: dropletlab._backend
falls back to the pure-numpy kernels in dropletlab._kernels_py.  The
extension is marked optional so a missing compiler degrades gracefully.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "dropletlab._kernels",
        sources=["src/dropletlab/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
