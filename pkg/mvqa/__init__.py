"""
Machine-vision-aware quality checkers for compressed images and video
frames.
"""

__version__ = '0.1-dev'
