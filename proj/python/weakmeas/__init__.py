"""Repeated weak measurements of a finite-dimensional observable."""

from ._core import *  # noqa: F401,F403
from ._core import ValidationError, __doc__  # noqa: F401
