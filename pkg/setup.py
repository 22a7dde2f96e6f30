# -*- coding: utf-8 -*-

from setuptools import setup

setup(
    package_data={
        'thzqs': ['config/config.json', 'data/*.txt', 'version.txt'],
    }
)
