from .base import BaseNoiseStrategy, BaseResetStrategy, ResetOutcome
from .noise import ExactNoise, FirstOrderNoise, OrderedProductNoise
from .reset import PostselectReset, ReplaceReset

__all__ = [
    "BaseNoiseStrategy",
    "BaseResetStrategy",
    "ResetOutcome",
    "ExactNoise",
    "FirstOrderNoise",
    "OrderedProductNoise",
    "PostselectReset",
    "ReplaceReset",
]
