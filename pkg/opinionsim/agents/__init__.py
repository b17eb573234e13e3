"""
Influence controllers.

Each archetype overrides its own row of the opinion update:
- stubborn:  W row replaced by e_i, the opinion never moves
- popular:   posts a rho-emphasised mean of its neighbours
- strategic: same, with its goal appended as an extra "neighbour"
"""

from .popular import apply_popular, emphasized_weights, popular_weights
from .spec import Archetype, ControllerSpec
from .strategic import apply_strategic, strategic_weights
from .stubborn import apply_stubborn

__all__ = [
    "Archetype",
    "ControllerSpec",
    "apply_popular",
    "apply_strategic",
    "apply_stubborn",
    "emphasized_weights",
    "popular_weights",
    "strategic_weights",
]
