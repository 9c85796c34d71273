import pytest
from zeno_codes.registry import ChannelRegistry
from zeno_codes.channels.noise import ExactNoise, FirstOrderNoise, OrderedProductNoise
from zeno_codes.channels.reset import PostselectReset, ReplaceReset
from zeno_codes.exceptions import InvalidParameterError

def test_registry_exact_noise():
    assert isinstance(ChannelRegistry.get_noise("exact"), ExactNoise)

def test_registry_first_order_noise():
    assert isinstance(ChannelRegistry.get_noise("first_order"), FirstOrderNoise)

def test_registry_ordered_product_noise():
    assert isinstance(ChannelRegistry.get_noise("ordered_product"), OrderedProductNoise)

def test_registry_resets():
    assert isinstance(ChannelRegistry.get_reset("postselect"), PostselectReset)
    assert isinstance(ChannelRegistry.get_reset("replace"), ReplaceReset)

def test_registry_unknown_mode():
    with pytest.raises(InvalidParameterError):
        ChannelRegistry.get_noise("magnus")
    with pytest.raises(InvalidParameterError):
        ChannelRegistry.get_reset("measure")

def test_registry_mode_listing():
    assert ChannelRegistry.noise_modes() == ["exact", "first_order", "ordered_product"]
    assert ChannelRegistry.reset_modes() == ["postselect", "replace"]
