from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

requirements = [
    "numpy>=1.21.0",  # For vector arithmetic and seeded sampling
    "python-dotenv>=0.19.0",  # For FIXPOINT_SEED in a local .env
    "rich>=12.0.0",  # For console output formatting
]

test_requirements = [
    "pytest>=7.0.0",
    "pytest-cov>=4.0.0",
    "hypothesis>=6.0.0",  # For property suites
    "mpmath>=1.2.0",  # For high-precision norm oracles
]

setup(
    name="fixpoint-lab",
    version="1.0.0",
    description="A laboratory for multi-step fixed-point iterations in l_p spaces",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    extras_require={
        "test": test_requirements,
    },
    entry_points={
        "console_scripts": [
            "fixpoint=fixpoint_lab.cli:main",
        ],
    },
)
