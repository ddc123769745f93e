"""
Configuration package for the bridge laboratory.
"""
