import os 
import sys
from setuptools import setup, find_packages

root = os.path.abspath(os.path.dirname(__file__))

package_name = "stgcs"
packages = find_packages(include=[package_name, "{}.*".format(package_name)])

_locals = {}
with open(os.path.join(package_name, "_version.py")) as fp:
    exec(fp.read(), None, _locals)

version = _locals["__version__"]
binary_names = _locals["binary_names"]

deps = {
    'main': [
        'tqdm',
        'pyyaml',
        'pysimdjson',
        'numpy>=1.21',
        'scipy>=1.9',
        'networkx>=2.6',
        'matplotlib>=3.5',
    ],
    'extras':{
        'test': ['pytest'],
    }
}


with open(os.path.join(root, 'README.md'), 'rb') as readme:
    long_description = readme.read().decode('utf-8')

setup(
    name="stgcs",
    version=version,
    description="Multi-robot motion planning with space-time graphs of convex sets",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires='>=3.8',
    install_requires=deps['main'],
    extras_require=deps['extras'],
    packages=packages,
    entry_points={
        'console_scripts': [f'{name}={package_name}.cli:main' for name in binary_names],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
    ],
)
