"""oqt-sim - stochastic thermalization and collapse dynamics in the energy eigenbasis."""

__version__ = "0.3.0"
__author__ = "oqt-sim developers"
__license__ = "MIT"
