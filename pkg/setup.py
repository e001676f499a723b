#!/usr/bin/env python3
"""Setup script for the sparse-carath toolkit."""

from setuptools import setup, find_packages

setup(
    name="sparse-carath",
    version="0.1.0",
    description="Approximate Caratheodory sparsification toolkit and CLI",
    author="Sparse Carath Developers",
    author_email="dev@sparse-carath.dev",
    url="https://github.com/sparse-carath/sparse-carath",
    packages=find_packages(include=["sparse_carath*"]),
    install_requires=[
        "typer>=0.9.0",
        "rich>=13.0.0",
        "numpy>=1.22",
        "scipy>=1.8",
        "networkx>=2.8",
    ],
    entry_points={
        "console_scripts": [
            "sparse-carath=sparse_carath.cli:main",
        ],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
