"""
Result and run-description records.
"""
from .report import CurvePoint, CurveTable, RunConfig, StabilityReport, Verdicts

__all__ = ['CurvePoint', 'CurveTable', 'RunConfig', 'StabilityReport', 'Verdicts']
