from Cython.Build import cythonize
from setuptools import setup

setup(
    ext_modules=cythonize(
        ["src/ootp/translate/_speedups.pyx"],
        compiler_directives={"language_level": "3"},
    )
)
