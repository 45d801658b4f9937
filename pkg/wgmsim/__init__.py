"""Double-pumped WGM optomechanics simulator."""

__version__ = '1.0.0'
