"""
Segmentation model, losses, mixing and the self-training loop.
"""
