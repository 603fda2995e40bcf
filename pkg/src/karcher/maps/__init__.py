"""Nonexpansive maps driving approximating resolvents and semigroups."""

from karcher.maps.base import NonexpansiveMap
from karcher.maps.simple import FunctionMap, GeodesicStepMap, IdentityMap
from karcher.maps.trotter import Order, TrotterMap

__all__ = [
    "NonexpansiveMap",
    "FunctionMap",
    "GeodesicStepMap",
    "IdentityMap",
    "Order",
    "TrotterMap",
]
