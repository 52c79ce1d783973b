from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("hybridpos._kernels", ["src/hybridpos/_kernels.pyx"], optional=True)],
        language_level=3,
    )
except ImportError:  # pure-Python fallback is used at runtime
    ext_modules = []

setup(ext_modules=ext_modules)
