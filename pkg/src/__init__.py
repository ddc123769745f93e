"""
Bridge laboratory: trace-constrained Sobolev quotients on the half-space.
"""

__version__ = '1.0.1'
