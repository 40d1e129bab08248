"""Build script: compiles the optional Viterbi C extension.

The extension is best-effort. If Cython or a C compiler is unavailable the
install still succeeds and scmlink.codec falls back to the numpy kernel.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "scmlink._viterbi_cy",
                ["src/scmlink/_viterbi_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    print(f"scmlink: skipping C extension build ({exc}); pure-Python kernel will be used")

setup(ext_modules=ext_modules)
