#!/usr/bin/env python

from setuptools import setup, find_packages

exec(open('fasloc/version.py').read())

setup(
    name='fasloc',
    version=__version__,
    packages=find_packages(exclude=['examples', 'examples.*']),
    license='BSD-2-clause',
    description=('Three dimensional user localization with an active '
                 'reconfigurable intelligent surface and a fluid antenna '
                 'base station.'),
    long_description=open('README.rst').read(),
    python_requires='>=3.6',
    install_requires=['numpy>=1.17',
                      'scipy>=1.2',
                      'sympy>=1.9',  # lambdify(cse=True)
                      'cyipopt>=1.0',
                      ],
    extras_require={'plot': ['matplotlib>=3.0',
                             ],
                    'doc': ['sphinx',
                            'numpydoc',
                            ],
                    'test': ['pytest',
                             ],
                    },
    entry_points={'console_scripts': ['fasloc=fasloc.harness:main']},
    classifiers=['Programming Language :: Python',
                 'Programming Language :: Python :: 3',
                 'Operating System :: OS Independent',
                 'Development Status :: 3 - Alpha',
                 'Intended Audience :: Science/Research',
                 'License :: OSI Approved :: BSD License',
                 'Natural Language :: English',
                 'Topic :: Scientific/Engineering']
)
