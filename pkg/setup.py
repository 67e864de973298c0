"""Build script for the optional compiled kernel.

The package is pure Python except for qradon._kernels._core, a small Cython
module holding the hot inner loops (flat phase sums for theta evaluation).
If Cython or a C compiler is unavailable the build proceeds without the
extension and the numpy fallback in qradon._kernels._ref is used at runtime.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/qradon/_kernels/_core.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(np.get_include())
except Exception as exc:  # noqa: BLE001
    print(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)
