"""
Utilities package for the bridge laboratory.
"""
