"""
Command handlers for the bridge-lab CLI.
"""
