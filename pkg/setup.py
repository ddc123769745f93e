from setuptools import setup, find_packages

setup(
    name="bridge_lab",
    version="1.0.1",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
    install_requires=[
        "python-dotenv==1.0.0",
        "pydantic==2.4.2",
        "numpy>=1.24,<3",
        "scipy>=1.10,<2",
        "structlog==23.1.0",
    ],
    extras_require={
        "test": ["pytest==7.4.2", "pytest-cov==4.1.0", "hypothesis>=6.80,<7"],
    },
    entry_points={"console_scripts": ["bridge-lab=src.app:main"]},
    python_requires=">=3.9",
)
