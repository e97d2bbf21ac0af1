"""
Visibility boost for adverse-condition images.
"""
