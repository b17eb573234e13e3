"""
opinionsim - co-evolving opinion / network dynamics with influence controllers.
"""

__version__ = "0.1.0"
