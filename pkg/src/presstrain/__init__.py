"""Pressure-sensitivity training platform.

Simulates a 12-channel force-sensing glove, calibrates counts to Newtons
with a quintic fit, trains force control through a runner game and
target-hold trials, and analyses two-group outcomes with rank statistics.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
