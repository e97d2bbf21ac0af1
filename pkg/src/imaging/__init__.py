"""
Image value types, pixel primitives and PPM/PGM codecs.
"""
