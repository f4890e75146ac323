"""
Test suite for the XX-chain entanglement engine.
"""
