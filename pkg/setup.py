from setuptools import find_packages, setup

with open("requirements.txt") as f:
    requirements = [line.strip() for line in f if line.strip() and line.strip() not in ("argparse", "pytest")]

setup(
    name="cehpo",
    version="0.1.0",
    description="Cross-entropy hyperparameter optimization",
    packages=find_packages(include=["cehpo", "cehpo.*"]),
    python_requires=">=3.10",
    install_requires=requirements,
    entry_points={"console_scripts": ["cehpo=cehpo.main:main"]},
)
