"""
Test suite for the Sysmel kernel
"""
