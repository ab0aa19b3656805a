
# Thanks: http://pythonhosted.org/an_example_pypi_project/setuptools.html

import os
from setuptools import setup

def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setup(
    name = "riemann_heat",
    version = "0.0.1",
    description = ("Heat kernels for differential forms on the plane, "
                   "the sphere, the hyperbolic plane and their quotients."),
    license = "BSD",
    keywords = "heat kernel hodge laplacian mehler-fock riemann surfaces",
    packages=['riemann_heat', 'riemann_heat.test'],
    install_requires=['numpy>=1.9.2', 'scipy>=0.19'],
    extras_require={'test': ['mpmath']},
    entry_points={
        'console_scripts': ['riemann-heat=riemann_heat.cli:main'],
    },
    long_description=read('README.md'),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: BSD License",
    ],
)
