"""Commercial objects exchanged during replenishment and wholesale.

Each type converts to and from the JSON-shaped message content used on the
wire; the dataclasses are what skills and strategies operate on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

__all__ = ["PurchaseOrder", "Proposal", "DeliveryOption", "OrderStatusError"]

_PO_TRANSITIONS = {
    "draft": {"proposed"},
    "proposed": {"accepted", "rejected"},
    "accepted": {"fulfilled"},
    "rejected": set(),
    "fulfilled": set(),
}


class OrderStatusError(ValueError):
    pass


@dataclass(frozen=True)
class DeliveryOption:
    option_id: str
    carrier: str
    rate: float
    eta_ms: int

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError("rate must be non-negative")
        if self.eta_ms <= 0:
            raise ValueError("eta must be positive")

    def to_content(self) -> dict[str, Any]:
        return {
            "option_id": self.option_id,
            "carrier": self.carrier,
            "rate": self.rate,
            "eta_ms": self.eta_ms,
        }

    @classmethod
    def from_content(cls, obj: dict[str, Any]) -> "DeliveryOption":
        return cls(obj["option_id"], obj["carrier"], obj["rate"], obj["eta_ms"])


@dataclass(frozen=True)
class PurchaseOrder:
    order_id: str
    buyer: str
    seller: str
    product: str
    quantity: float
    unit_price: float
    delivery_address: tuple[float, float]
    delivery_option: str | None = None
    status: str = "draft"

    def __post_init__(self) -> None:
        if self.quantity <= 0:
            raise ValueError("quantity must be positive")
        if self.unit_price < 0:
            raise ValueError("unit_price must be non-negative")

    def advance(self, status: str) -> "PurchaseOrder":
        if status not in _PO_TRANSITIONS.get(self.status, set()):
            raise OrderStatusError(f"cannot move order from {self.status} to {status}")
        return replace(self, status=status)

    def to_content(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "order_id": self.order_id,
            "buyer": self.buyer,
            "seller": self.seller,
            "product": self.product,
            "quantity": self.quantity,
            "unit_price": self.unit_price,
            "delivery_address": list(self.delivery_address),
            "status": self.status,
        }
        if self.delivery_option is not None:
            obj["delivery_option"] = self.delivery_option
        return obj

    @classmethod
    def from_content(cls, obj: dict[str, Any]) -> "PurchaseOrder":
        return cls(
            order_id=obj["order_id"],
            buyer=obj["buyer"],
            seller=obj["seller"],
            product=obj["product"],
            quantity=obj["quantity"],
            unit_price=obj["unit_price"],
            delivery_address=tuple(obj["delivery_address"]),
            delivery_option=obj.get("delivery_option"),
            status=obj.get("status", "draft"),
        )


@dataclass(frozen=True)
class Proposal:
    proposer: str
    order_id: str
    unit_price: float
    quantity: float
    delivery_options: tuple[DeliveryOption, ...] = ()

    def __post_init__(self) -> None:
        if self.quantity <= 0:
            raise ValueError("quantity must be positive")

    def best_eta_ms(self) -> int | None:
        etas = [o.eta_ms for o in self.delivery_options]
        return min(etas) if etas else None

    def to_content(self) -> dict[str, Any]:
        return {
            "proposer": self.proposer,
            "order_id": self.order_id,
            "unit_price": self.unit_price,
            "quantity": self.quantity,
            "delivery_options": [o.to_content() for o in self.delivery_options],
        }

    @classmethod
    def from_content(cls, obj: dict[str, Any]) -> "Proposal":
        return cls(
            proposer=obj["proposer"],
            order_id=obj["order_id"],
            unit_price=obj["unit_price"],
            quantity=obj["quantity"],
            delivery_options=tuple(
                DeliveryOption.from_content(o) for o in obj.get("delivery_options", [])
            ),
        )
