"""Supplier agent: sells meat to wholesalers via contract-net.

Participant side of the replenishment negotiation: screens each call for
proposals against stock, fetches delivery options from its logistics
partner, proposes at its list price, and on award books the delivery and
reports completion back to the buyer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..discovery import ServiceDescription
from ..inventory import InventoryRecord, apply_outbound, release
from ..messaging import CONTRACT_NET, DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..orders import DeliveryOption, Proposal, PurchaseOrder
from ..protocols import cn_complete, cn_fail, cn_respond_propose, cn_respond_refuse
from ..runtime import AgentConfig, System
from ..strategy import StrategyParams, assess_order
from .common import CallbackSkill, StatusSkill, registration_behaviour

__all__ = ["SupplierConfig", "SupplierSkill", "build_supplier_agent"]


@dataclass
class SupplierConfig:
    name: str
    product: str = "beef"
    unit_price: float = 6.0
    expected_price: float = 6.0
    location: tuple[float, float] = (52.2432, 0.0847)
    performance: float = 0.9
    initial_stock: float = 10_000.0
    logistics: str = "logistics"
    oef: str = "oef"
    seed: int = 0
    request_timeout_ms: int = 5_000


class SupplierSkill(CallbackSkill):
    name = "meat-supply"
    ontologies = ("meat-trade", "logistics")
    protocols = (CONTRACT_NET, REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: SupplierConfig):
        super().__init__()
        self.config = config
        self.strategy = StrategyParams(expected_price=config.expected_price)
        self.inventory = InventoryRecord(
            product=config.product, on_hand=config.initial_stock
        )
        # order id -> {conversation, quantity, buyer, destination, tracking}
        self.pending: dict[str, dict[str, Any]] = {}
        self._by_tracking: dict[str, str] = {}

    def behaviours(self):
        return [registration_behaviour(self, self.config.oef, self._description)]

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(
            owner=ctx.name,
            kind="meat-supply",
            attributes={
                "product": self.config.product,
                "unit_price": self.config.unit_price,
                "location": self.config.location,
                "performance": self.config.performance,
            },
        )

    def _set_inventory(self, ctx, inv: InventoryRecord, change: float, reason: str) -> None:
        self.inventory = inv
        ctx.publish(
            "status",
            {"event": "inventory", "agent": ctx.name, "product": inv.product,
             "on_hand": inv.on_hand, "reserved": inv.reserved,
             "change": change, "reason": reason},
        )

    def inventory_overview(self, ctx) -> dict[str, Any]:
        return {
            self.inventory.product: {
                "on_hand": self.inventory.on_hand,
                "reserved": self.inventory.reserved,
            }
        }

    # --- negotiation (participant) ---

    def on_cfp(self, ctx, dialogue, env):
        order = (env.content or {}).get("order") or {}
        conversation = dialogue.conversation
        try:
            po = PurchaseOrder(
                order_id=order["order_id"],
                buyer=order["buyer"],
                seller=ctx.name,
                product=order["product"],
                quantity=order["quantity"],
                unit_price=self.config.unit_price,
                delivery_address=tuple(order["delivery_address"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            self._refuse(ctx, conversation, f"bad-order: {exc}")
            return
        if po.product != self.inventory.product:
            self._refuse(ctx, conversation, "product-not-carried")
            return
        assessment = assess_order(po, self.inventory, self.strategy)
        if not assessment.accepted:
            self._refuse(ctx, conversation, assessment.reason or "rejected")
            return
        self._set_inventory(ctx, assessment.inventory, 0.0, f"reserve:{po.order_id}")
        self.pending[po.order_id] = {
            "conversation": conversation,
            "quantity": po.quantity,
            "buyer": po.buyer,
            "destination": list(po.delivery_address),
        }
        self._fetch_delivery_options(ctx, po)

    def _refuse(self, ctx, conversation: str, reason: str) -> None:
        dialogue = self.dialogues.get(conversation)
        if dialogue is None:
            return
        new, actions = cn_respond_refuse(dialogue, reason, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)

    def _fetch_delivery_options(self, ctx, po: PurchaseOrder) -> None:
        def on_options(ctx, env):
            options = [
                DeliveryOption.from_content(o)
                for o in (env.content or {}).get("options", [])
            ]
            self._propose(ctx, po, options)

        def on_timeout(ctx):
            self._abort_pending(ctx, po.order_id, "logistics-unavailable")

        self.request(
            ctx,
            AgentAddress(self.config.logistics),
            "get",
            "logistics",
            {"resource": "delivery-options",
             "origin": list(self.config.location),
             "destination": list(po.delivery_address),
             "order_id": po.order_id,
             "quantity": po.quantity},
            on_response=on_options,
            on_timeout=on_timeout,
            timeout_ms=self.config.request_timeout_ms,
        )

    def _abort_pending(self, ctx, order_id: str, reason: str) -> None:
        pending = self.pending.pop(order_id, None)
        if pending is None:
            return
        self._set_inventory(
            ctx, release(self.inventory, pending["quantity"]), 0.0,
            f"release:{order_id}",
        )
        self._refuse(ctx, pending["conversation"], reason)

    def _propose(self, ctx, po: PurchaseOrder, options: list[DeliveryOption]) -> None:
        pending = self.pending.get(po.order_id)
        if pending is None:
            return
        if not options:
            self._abort_pending(ctx, po.order_id, "no-delivery-options")
            return
        dialogue = self.dialogues.get(pending["conversation"])
        if dialogue is None:
            return
        proposal = Proposal(
            proposer=ctx.name,
            order_id=po.order_id,
            unit_price=self.config.unit_price,
            quantity=po.quantity,
            delivery_options=tuple(options),
        )
        new, actions = cn_respond_propose(
            dialogue, {"proposal": proposal.to_content()}, ctx.now_ms()
        )
        self.run_dialogue(ctx, new, actions)
        self.listen(pending["conversation"], self._trade_listener(po.order_id))

    def _trade_listener(self, order_id: str):
        def listener(ctx, dialogue, event, data):
            if event == "awarded":
                self._book_delivery(ctx, order_id, data.content or {})
            elif event == "rejected":
                pending = self.pending.pop(order_id, None)
                if pending is not None:
                    self._set_inventory(
                        ctx, release(self.inventory, pending["quantity"]), 0.0,
                        f"release:{order_id}",
                    )

        return listener

    # --- fulfilment after award ---

    def _book_delivery(self, ctx, order_id: str, accept_content: dict) -> None:
        pending = self.pending.get(order_id)
        if pending is None:
            return
        option_id = accept_content.get("delivery_option")

        def on_booked(ctx, env):
            body = env.content or {}
            tracking = body.get("tracking_number")
            if not tracking:
                self._fail_order(ctx, order_id, body.get("error", "booking-failed"))
                return
            pending["tracking"] = tracking
            self._by_tracking[tracking] = order_id
            outbound = apply_outbound(self.inventory, pending["quantity"])
            self._set_inventory(ctx, outbound, -pending["quantity"], f"outbound:{order_id}")
            ctx.publish(
                "notification",
                {"event": "delivery-commencing", "agent": ctx.name,
                 "process": pending["conversation"], "order_id": order_id,
                 "tracking_number": tracking, "carrier": body.get("carrier", "")},
            )

        def on_timeout(ctx):
            self._fail_order(ctx, order_id, "logistics-unavailable")

        self.request(
            ctx,
            AgentAddress(self.config.logistics),
            "post",
            "logistics",
            {"task": "delivery-order",
             "order_id": order_id,
             "option_id": option_id or "",
             "origin": list(self.config.location),
             "destination": pending["destination"],
             "quantity": pending["quantity"],
             "requester": ctx.name,
             "recipient": pending["buyer"]},
            on_response=on_booked,
            on_timeout=on_timeout,
            timeout_ms=self.config.request_timeout_ms,
        )

    def _fail_order(self, ctx, order_id: str, reason: str) -> None:
        pending = self.pending.pop(order_id, None)
        if pending is None:
            return
        self._set_inventory(
            ctx, release(self.inventory, pending["quantity"]), 0.0, f"release:{order_id}"
        )
        dialogue = self.dialogues.get(pending["conversation"])
        if dialogue is not None:
            new, actions = cn_fail(dialogue, {"reason": reason}, ctx.now_ms())
            self.run_dialogue(ctx, new, actions)

    # --- delivery status posts from logistics ---

    def on_request(self, ctx, dialogue, env):
        content = env.content or {}
        if content.get("resource") == "price":
            # information query service: current list price
            if content.get("product") not in (None, self.config.product):
                self.respond(ctx, dialogue, {"error": "product-not-carried"})
            else:
                self.respond(ctx, dialogue, {"product": self.config.product,
                                             "unit_price": self.config.unit_price})
            return
        if content.get("task") != "delivery-status":
            self.respond(ctx, dialogue, {"error": "not-supported"})
            return
        tracking = content.get("tracking_number", "")
        status = content.get("status", "")
        self.respond(ctx, dialogue, {"status": "ok"})
        order_id = self._by_tracking.get(tracking)
        if order_id is None:
            return
        if status == "delivered":
            self._complete_order(ctx, order_id, tracking)
        elif status == "failed":
            self._fail_delivery(ctx, order_id, tracking)

    def _complete_order(self, ctx, order_id: str, tracking: str) -> None:
        pending = self.pending.pop(order_id, None)
        self._by_tracking.pop(tracking, None)
        if pending is None:
            return
        dialogue = self.dialogues.get(pending["conversation"])
        if dialogue is None:
            return
        receipt = {
            "type": "receipt",
            "receipt": {
                "order_id": order_id,
                "quantity": pending["quantity"],
                "tracking_number": tracking,
                "status": "delivered",
            },
        }
        new, actions = cn_complete(dialogue, receipt, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)

    def _fail_delivery(self, ctx, order_id: str, tracking: str) -> None:
        pending = self.pending.pop(order_id, None)
        self._by_tracking.pop(tracking, None)
        if pending is None:
            return
        dialogue = self.dialogues.get(pending["conversation"])
        if dialogue is not None:
            new, actions = cn_fail(
                dialogue, {"reason": "delivery-failure"}, ctx.now_ms()
            )
            self.run_dialogue(ctx, new, actions)


def build_supplier_agent(system: System, config: SupplierConfig):
    skill = SupplierSkill(config)
    status = StatusSkill(skill.inventory_overview)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill, status],
    )
    return agent, skill
