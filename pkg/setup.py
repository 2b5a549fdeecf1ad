"""Build script: compiles the optional split-scan kernel.

The package works without the extension (a numpy fallback is selected at
import time), so any Cython or compiler failure downgrades to a plain
pure-Python install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ttpmine/gbdt/_split_cy.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build env
    print(f"split kernel extension skipped ({exc}); using pure-Python fallback")

setup(ext_modules=ext_modules)
