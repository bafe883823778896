import sys

from setuptools import Extension, setup

# The compiled NNLS kernel is optional: the package falls back to the pure
# NumPy implementation at import time if the extension is missing.
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "biarch._nnls_cy",
                ["src/biarch/_nnls_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build environments without Cython
    print(f"warning: building without compiled kernel ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
