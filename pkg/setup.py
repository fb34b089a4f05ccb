from setuptools import setup, find_packages

setup(name='DEC2D',
      version='0.1.0',
      description="Local discrete exterior calculus and linear finite element "
        "solvers for the 2D anisotropic, heterogeneous Poisson equation on "
        "triangle meshes.",
      install_requires=[
        'numpy',
        'scipy',
        'pandas>=1.5',
        'loguru',
        'rtree'
      ],
      extras_require={
        'test': ['pytest', 'hypothesis']
      },
      entry_points={
        'console_scripts': ['dec2d=DEC2D.cli:main']
      },
      license='MIT',
      packages=find_packages(exclude=['tests']),
      package_data={'DEC2D': ['presets/*.ini']},
      zip_safe=False
      )
