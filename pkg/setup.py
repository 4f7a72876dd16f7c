"""Build the optional Cython kernels.

The package works without them; ``peer_rank._backend`` falls back to the
pure-Python kernels when the extension is missing.
"""
import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PEER_RANK_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available, skipping compiled kernels", file=sys.stderr)
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "peer_rank._kernels",
                    ["src/peer_rank/_kernels.pyx"],
                    # keep float results identical to the Python fallback
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
