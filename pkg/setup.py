from setuptools import Extension, setup

# The exact-GED search has a compiled kernel. The build is optional: when
# Cython (or a C compiler) is unavailable the package falls back to the
# pure-Python kernel at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("gedraft.ged._astar", ["src/gedraft/ged/_astar.pyx"])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
