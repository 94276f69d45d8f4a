from setuptools import setup, find_packages


setup(
    name="stencilforge",
    version="0.1.0a1",
    description=("Symbolic finite-difference stencils "
                 "compiled to C kernels at runtime."),
    license="Apache License 2.0",
    keywords="finite-difference stencil jit codegen",
    packages=find_packages(exclude=["tests", "tests_integ"]),
    install_requires=[
        "numpy",
    ],
    entry_points={
        "console_scripts": [
            "stencilforge=stencilforge.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: POSIX",
        "Programming Language :: C",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering",
        "Topic :: Software Development :: Code Generators",
    ],
)
