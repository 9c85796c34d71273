import logging
from typing import List

from .channels.base import BaseNoiseStrategy, BaseResetStrategy
from .channels.noise import ExactNoise, FirstOrderNoise, OrderedProductNoise
from .channels.reset import PostselectReset, ReplaceReset
from .exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


class ChannelRegistry:
    """Factory and registry for noise and ancilla-reset strategies."""

    _noise = {
        'first_order': FirstOrderNoise(),
        'exact': ExactNoise(),
        'ordered_product': OrderedProductNoise(),
    }

    _resets = {
        'postselect': PostselectReset(),
        'replace': ReplaceReset(),
    }

    @staticmethod
    def get_noise(mode: str) -> BaseNoiseStrategy:
        """
        Get a noise strategy.

        Args:
           mode: 'first_order', 'exact' or 'ordered_product'
        """
        if mode not in ChannelRegistry._noise:
            raise InvalidParameterError(f"Unknown noise mode: {mode}")
        return ChannelRegistry._noise[mode]

    @staticmethod
    def get_reset(mode: str) -> BaseResetStrategy:
        """
        Get an ancilla reset strategy.

        Args:
           mode: 'postselect' or 'replace'
        """
        if mode not in ChannelRegistry._resets:
            raise InvalidParameterError(f"Unknown reset mode: {mode}")
        return ChannelRegistry._resets[mode]

    @staticmethod
    def noise_modes() -> List[str]:
        return sorted(ChannelRegistry._noise)

    @staticmethod
    def reset_modes() -> List[str]:
        return sorted(ChannelRegistry._resets)
