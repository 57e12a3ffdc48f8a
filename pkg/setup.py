#!/usr/bin/env python
"""
ricci_cluster 安装脚本
"""
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="ricci_cluster",
    version="1.0.0",
    description="图曲率计算与基于 Ricci 流的单隶属/混合隶属社区发现",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    py_modules=["main"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=[
        "pydantic>=2.0.0",
        "networkx>=3.0",
        "numpy>=1.22",
        "scipy>=1.9",
        "pandas>=1.5",
        "scikit-learn>=1.1",
        "POT>=0.9",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "ricci_cluster=main:main",
        ],
    },
)
