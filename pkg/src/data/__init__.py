"""
Synthetic benchmark generation and split loading.
"""
