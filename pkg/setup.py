import os

import numpy as np
from setuptools import Extension, setup

# Set IONFORGE_NO_EXT=1 to install without compiling; the pure-Python
# kernels are used automatically when the extension is missing.
ext_modules = []
if not os.environ.get("IONFORGE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "ionforge._ckernels",
                    ["src/ionforge/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
