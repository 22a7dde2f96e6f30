# -*- coding: utf-8 -*-
"""CODATA constants used across the package (single source, via scipy)."""

from scipy import constants as _codata

SPEED_OF_LIGHT = _codata.c
PLANCK = _codata.h
BOLTZMANN = _codata.k
ZERO_CELSIUS = _codata.zero_Celsius

TERAHERTZ = 1.0e12
MICROMETER = 1.0e-6
