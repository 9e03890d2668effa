#!/usr/bin/env python3
"""
Setup script for ebt-rvnn
"""

import os
import re

from setuptools import setup, find_packages

this_directory = os.path.abspath(os.path.dirname(__file__))


def read(*parts):
    with open(os.path.join(this_directory, *parts), encoding='utf-8') as f:
        return f.read()


# single source of truth for the version
version = re.search(r'^version = "([^"]+)"', read('src', 'ebt_rvnn', '_version.py'), re.M).group(1)

requirements = [
    line.strip() for line in read('requirements.txt').splitlines()
    if line.strip() and not line.startswith('#')
]

setup(
    name="ebt-rvnn",
    version=version,
    description="Memory-efficient beam tree recursive neural networks with parent attention, "
                "a ListOps harness and an activation-memory profiler",
    long_description=read('README.md'),
    long_description_content_type="text/markdown",
    packages=find_packages(where="src", exclude=["*.test"]),
    package_dir={"": "src"},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "black>=22.0.0",
            "flake8>=5.0.0",
            "mypy>=1.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "ebt-rvnn=ebt_rvnn.cli:main",
            "ebt=ebt_rvnn.cli:main",
        ],
    },
    zip_safe=False,
)
