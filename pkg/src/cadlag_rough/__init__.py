"""Step-2 rough-path numerics for paths with jumps.

Subpackages cover the group algebra, cadlag paths and jump interpolation,
level-2 lifts, Skorokhod-type metrics, RDE solvers and a stochastic
simulation harness, plus a command line front end (cadlag-rough).
"""

from ._backend import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
