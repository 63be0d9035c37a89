from setuptools import setup, find_packages

setup(
    name='mv-quality',
    version='0.1-dev',
    description='Quality metrics tuned to machine-vision tasks on '
                'compressed images.',
    python_requires='>=3.8',
    install_requires=[
        'funcy', 'numpy', 'scipy', 'Pillow', 'torch', 'torchvision',
        'matplotlib', 'PyYAML', 'Levenshtein'
    ],
    extras_require={'test': ['pytest']},
    packages=find_packages(include=['mvqa*']),
    entry_points={
        'console_scripts': [
            'run-mvqa = mvqa.pipeline_runner:main'
        ]
    }
)
