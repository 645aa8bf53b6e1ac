"""Inventory records and stock movements.

Records are immutable; every movement returns a new record and the owning
agent publishes the change as an inventory event, giving an append-only
audit trail next to the periodic state snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = [
    "InventoryRecord",
    "InventoryError",
    "apply_inbound",
    "apply_outbound",
    "reserve",
    "release",
    "free_stock",
    "replenishment_due",
]


class InventoryError(ValueError):
    """Movement would violate a stock invariant."""


@dataclass(frozen=True)
class InventoryRecord:
    product: str
    on_hand: float = 0.0
    reorder_point: float = 0.0
    reorder_quantity: float = 0.0
    reserved: float = 0.0

    def __post_init__(self) -> None:
        if self.on_hand < 0:
            raise InventoryError(f"{self.product}: on_hand cannot be negative")
        if self.reserved < 0 or self.reserved > self.on_hand:
            raise InventoryError(f"{self.product}: reserved must stay within on_hand")


def free_stock(inv: InventoryRecord) -> float:
    return inv.on_hand - inv.reserved


def apply_inbound(inv: InventoryRecord, qty: float) -> InventoryRecord:
    if qty <= 0:
        raise InventoryError("inbound quantity must be positive")
    return replace(inv, on_hand=inv.on_hand + qty)


def apply_outbound(inv: InventoryRecord, qty: float) -> InventoryRecord:
    """Ship ``qty`` out, releasing any reservation that covered it."""
    if qty <= 0:
        raise InventoryError("outbound quantity must be positive")
    if qty > inv.on_hand:
        raise InventoryError(
            f"insufficient-stock: outbound {qty} exceeds on_hand {inv.on_hand}"
        )
    released = min(inv.reserved, qty)
    return replace(inv, on_hand=inv.on_hand - qty, reserved=inv.reserved - released)


def reserve(inv: InventoryRecord, qty: float) -> InventoryRecord:
    if qty <= 0:
        raise InventoryError("reservation must be positive")
    if qty > free_stock(inv):
        raise InventoryError(
            f"insufficient-stock: cannot reserve {qty} of {free_stock(inv)} free"
        )
    return replace(inv, reserved=inv.reserved + qty)


def release(inv: InventoryRecord, qty: float) -> InventoryRecord:
    if qty <= 0 or qty > inv.reserved:
        raise InventoryError(f"cannot release {qty} of {inv.reserved} reserved")
    return replace(inv, reserved=inv.reserved - qty)


def replenishment_due(inv: InventoryRecord) -> bool:
    """True when free stock is at or below the reorder point.

    In-flight suppression (at most one open replenishment per product) is
    the owning agent's job; this is the pure threshold test.
    """
    return free_stock(inv) <= inv.reorder_point
