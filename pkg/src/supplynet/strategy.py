"""Rule-based decision logic for the trading agents.

Sellers accept an order when they can cover it from free stock and the
offered price meets their expectation; buyers pick the cheapest acceptable
proposal with deterministic tie-breaking.  Deliberately simple rules, all
parameters per agent and configurable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .discovery import Constraint
from .inventory import InventoryRecord, free_stock, reserve
from .orders import DeliveryOption, Proposal, PurchaseOrder

__all__ = [
    "StrategyParams",
    "Assessment",
    "NoAcceptableProposal",
    "assess_order",
    "evaluate_proposals",
    "select_delivery_option",
    "select_3pl",
]


class NoAcceptableProposal(ValueError):
    """Every proposal exceeded the buyer's price ceiling."""


@dataclass(frozen=True)
class StrategyParams:
    """Per-agent trading parameters.

    ``expected_price`` guards the selling side, ``max_price`` the buying
    side; ``vendor_constraints`` narrow discovery searches (minimum
    performance, within-km radius).
    """

    expected_price: float = 0.0
    max_price: float = 0.0
    vendor_constraints: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        if self.expected_price < 0 or self.max_price < 0:
            raise ValueError("prices must be non-negative")


@dataclass(frozen=True)
class Assessment:
    accepted: bool
    reason: str | None
    inventory: InventoryRecord


def assess_order(
    po: PurchaseOrder, inv: InventoryRecord, params: StrategyParams
) -> Assessment:
    """Seller-side order screening.

    Accept when free stock covers the quantity and the offered price is at
    least the expected price; acceptance reserves the quantity.
    """
    if po.product != inv.product:
        raise ValueError(f"product-mismatch: {po.product!r} vs {inv.product!r}")
    if free_stock(inv) < po.quantity:
        return Assessment(False, "insufficient-stock", inv)
    if po.unit_price < params.expected_price:
        return Assessment(False, "price-below-expected", inv)
    return Assessment(True, None, reserve(inv, po.quantity))


def evaluate_proposals(
    proposals: list[Proposal], params: StrategyParams
) -> Proposal:
    """Buyer-side winner selection.

    Proposals above ``max_price`` are dropped first; the rest are ordered by
    (unit price, shortest best-offered eta, proposer name) so the result is
    invariant under permutation of the input.
    """
    if not proposals:
        raise NoAcceptableProposal("no proposals to evaluate")
    acceptable = [p for p in proposals if p.unit_price <= params.max_price]
    if not acceptable:
        raise NoAcceptableProposal(
            f"all {len(proposals)} proposals exceed max price {params.max_price}"
        )

    def key(p: Proposal):
        eta = p.best_eta_ms()
        return (p.unit_price, eta if eta is not None else float("inf"), p.proposer)

    return min(acceptable, key=key)


def select_delivery_option(options: list[DeliveryOption]) -> DeliveryOption:
    """Deterministic cheapest-first pick: rate, then eta, then carrier name."""
    if not options:
        raise ValueError("no delivery options offered")
    return min(options, key=lambda o: (o.rate, o.eta_ms, o.carrier, o.option_id))


def select_3pl(eligible: list[str], rng: random.Random) -> str:
    """Uniform draw over the eligible fulfilment providers."""
    if not eligible:
        raise ValueError("no eligible fulfilment providers")
    return rng.choice(sorted(eligible))
