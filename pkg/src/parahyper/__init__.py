"""Numerical verification of para-hypercomplex, para-hyperhermitian and
para-hyperkähler structures on four-dimensional coordinate charts."""

from .errors import ParaHyperError
from .expr import parse, to_text
from .report import VerificationReport
from .splitquat import SplitQuaternion, canonical_triple

__all__ = ["ParaHyperError", "SplitQuaternion", "VerificationReport", "canonical_triple", "parse", "to_text"]
__version__ = "0.1.0"
