from setuptools import find_packages, setup

setup(
    name="dastgcn",
    version="0.1.0",
    description="Dynamic adaptive spatio-temporal graph convolution for time-series classification",
    packages=find_packages(include=["dastgcn", "dastgcn.*", "config", "utils"]),
    install_requires=[
        "numpy",
        "pydantic>=2",
        "pydantic-settings",
        "tqdm",
    ],
    entry_points={
        "console_scripts": [
            "dastgcn=dastgcn.cli:main",
        ],
    },
    python_requires=">=3.10",
)
