"""Symbolic execution engine and proof-obligation reports."""

from .exec import MethodVerifier, exec_method, verify_program
from .protocol import ProtocolInstance
from .report import KINDS, MethodReport, Obligation, Report, to_json

__all__ = ["KINDS", "MethodReport", "MethodVerifier", "Obligation", "ProtocolInstance",
           "Report", "exec_method", "to_json", "verify_program"]
