"""
Command modules for the vblc CLI.
"""
