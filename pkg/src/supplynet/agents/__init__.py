"""Concrete supply-chain agents: supplier, wholesaler, retailers, logistics,
third-party fulfilment, and the admin overseer."""

from .admin import AdminSkill, build_admin
from .common import CallbackSkill, ClientSkill, StatusSkill
from .fulfilment import FulfilmentSkill, build_fulfilment_agent
from .logistics import LogisticsSkill, build_logistics_agent
from .oef import DiscoverySkill, build_discovery_agent
from .retailer import RetailerSkill, build_retailer_agent
from .supplier import SupplierSkill, build_supplier_agent
from .wholesaler import WholesalerSkill, build_wholesaler_agent

__all__ = [
    "AdminSkill",
    "CallbackSkill",
    "ClientSkill",
    "DiscoverySkill",
    "FulfilmentSkill",
    "LogisticsSkill",
    "RetailerSkill",
    "StatusSkill",
    "SupplierSkill",
    "WholesalerSkill",
    "build_admin",
    "build_discovery_agent",
    "build_fulfilment_agent",
    "build_logistics_agent",
    "build_retailer_agent",
    "build_supplier_agent",
    "build_wholesaler_agent",
]
