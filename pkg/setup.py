from setuptools import Extension, setup

# -ffp-contract=off: the pure-Python fallback must match the compiled kernel
# bit for bit, so fused multiply-adds are disabled.
ext = Extension(
    "servofriction._kernel",
    ["src/servofriction/_kernel.pyx"],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    optional=True,
)

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
