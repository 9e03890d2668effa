"""
Version information for ebt-rvnn
"""

version = "0.3.0"
