import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; crnkit.ssa falls back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("CRNKIT_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "crnkit._ssa_kernel",
                ["src/crnkit/_ssa_kernel.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math: the kernel must stay bit-identical to the fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
