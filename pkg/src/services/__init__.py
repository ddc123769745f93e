"""
Services package for the bridge laboratory.
"""
