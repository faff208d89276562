"""Report generation modules."""

from .generator import ReportGenerator

__all__ = ['ReportGenerator']
