"""Wholesaler agent: the hub connecting suppliers, retailers, and logistics.

Initiates replenishment (discovery search, contract-net with suppliers,
delivery option selection) and serves wholesale orders from retailers with
a predetermined delivery option.  Inventory movements feed the automatic
replenishment trigger: whenever free stock falls to the reorder point, a
new replenishment process opens, with at most one in flight per product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..discovery import Constraint, Query, ServiceDescription
from ..inventory import (
    InventoryRecord,
    apply_inbound,
    apply_outbound,
    release,
    replenishment_due,
)
from ..messaging import CONTRACT_NET, DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..orders import DeliveryOption, Proposal, PurchaseOrder
from ..protocols import (
    cn_award,
    cn_complete,
    cn_fail,
    cn_initiate,
    cn_reject_all,
    cn_respond_propose,
    cn_respond_refuse,
)
from ..runtime import AgentConfig, Behaviour, System
from ..strategy import (
    NoAcceptableProposal,
    StrategyParams,
    assess_order,
    evaluate_proposals,
    select_delivery_option,
)
from .common import (
    DEFAULT_CFP_DEADLINE_MS,
    DEFAULT_REQUEST_TIMEOUT_MS,
    CallbackSkill,
    StatusSkill,
    registration_behaviour,
)

__all__ = ["WholesalerConfig", "WholesalerSkill", "build_wholesaler_agent"]


@dataclass
class WholesalerConfig:
    name: str
    product: str = "beef"
    expected_price: float = 8.0      # selling side: minimum acceptable offer
    max_price: float = 10.0          # buying side: ceiling for supplier proposals
    reorder_point: float = 20.0
    reorder_quantity: float = 100.0
    initial_stock: float = 0.0
    location: tuple[float, float] = (52.2053, 0.1218)
    performance: float = 0.85
    min_supplier_performance: float = 0.5
    supplier_radius_km: float = 100.0
    logistics: str = "logistics"
    oef: str = "oef"
    seed: int = 0
    cfp_deadline_ms: int = DEFAULT_CFP_DEADLINE_MS
    request_timeout_ms: int = DEFAULT_REQUEST_TIMEOUT_MS


class WholesalerSkill(CallbackSkill):
    name = "meat-wholesale"
    ontologies = ("meat-trade", "logistics")
    protocols = (CONTRACT_NET, REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: WholesalerConfig):
        super().__init__()
        self.config = config
        self.strategy = StrategyParams(
            expected_price=config.expected_price,
            max_price=config.max_price,
            vendor_constraints=(
                Constraint("performance", "in-range", (config.min_supplier_performance, 1.0)),
                Constraint("location", "within-km",
                           (config.location, config.supplier_radius_km)),
            ),
        )
        self.inventory = InventoryRecord(
            product=config.product,
            on_hand=config.initial_stock,
            reorder_point=config.reorder_point,
            reorder_quantity=config.reorder_quantity,
        )
        self.replenishing: set[str] = set()
        self.predetermined_option: DeliveryOption | None = None
        # seller side: order id -> {conversation, quantity, buyer, destination, tracking}
        self.sales: dict[str, dict[str, Any]] = {}
        self._sales_by_tracking: dict[str, str] = {}
        # buyer side: process id -> {quantity, order_id}
        self.processes: dict[str, dict[str, Any]] = {}
        self._order_seq = 0

    def behaviours(self):
        return [
            registration_behaviour(self, self.config.oef, self._description),
            Behaviour("pick-wholesale-delivery-option", self._pick_predetermined_option),
        ]

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(
            owner=ctx.name,
            kind="meat-wholesale",
            attributes={
                "product": self.config.product,
                "unit_price": self.config.expected_price,
                "location": self.config.location,
                "performance": self.config.performance,
            },
        )

    def _pick_predetermined_option(self, ctx, now) -> None:
        """One-shot at boot: quote logistics once and fix the wholesale option."""

        def on_options(ctx, env):
            options = [
                DeliveryOption.from_content(o)
                for o in (env.content or {}).get("options", [])
            ]
            if options:
                self.predetermined_option = select_delivery_option(options)
                ctx.publish(
                    "status",
                    {"event": "wholesale-delivery-option", "agent": ctx.name,
                     "option": self.predetermined_option.to_content()},
                )

        self.request(
            ctx,
            AgentAddress(self.config.logistics),
            "get",
            "logistics",
            {"resource": "delivery-options",
             "origin": list(self.config.location),
             "destination": list(self.config.location)},
            on_response=on_options,
            timeout_ms=self.config.request_timeout_ms,
        )

    # --- inventory plumbing ---

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
                "reorder_point": self.inventory.reorder_point,
                "free": self.inventory.on_hand - self.inventory.reserved,
            }
        }

    def _maybe_replenish(self, ctx) -> str | None:
        """Reorder-point check with in-flight suppression (one per product)."""
        product = self.inventory.product
        if product in self.replenishing:
            return None
        if not replenishment_due(self.inventory):
            return None
        ctx.publish(
            "notification",
            {"event": "replenishment-triggered", "agent": ctx.name,
             "product": product, "automatic": True,
             "free_stock": self.inventory.on_hand - self.inventory.reserved},
        )
        return self.start_replenishment(
            ctx, self.inventory.reorder_quantity, self.config.max_price
        )

    def _vendor_constraints(
        self, min_performance: float | None, radius_km: float | None
    ) -> tuple[Constraint, ...]:
        """Config constraints, tightened by per-order overrides when given."""
        performance = (
            self.config.min_supplier_performance
            if min_performance is None else min_performance
        )
        radius = self.config.supplier_radius_km if radius_km is None else radius_km
        return (
            Constraint("performance", "in-range", (performance, 1.0)),
            Constraint("location", "within-km", (self.config.location, radius)),
        )

    # --- replenishment (initiator) ---

    def start_replenishment(
        self,
        ctx,
        quantity: float,
        max_unit_price: float | None = None,
        min_performance: float | None = None,
        radius_km: float | None = None,
    ) -> str:
        process_id = ctx.new_conversation()
        self._order_seq += 1
        order_id = f"{ctx.name}-po-{self._order_seq}"
        self.replenishing.add(self.inventory.product)
        self.processes[process_id] = {"order_id": order_id, "quantity": quantity}
        ctx.publish(
            "notification",
            {"event": "process-started", "process": process_id,
             "scenario": "replenish", "agent": ctx.name,
             "order_id": order_id, "quantity": quantity},
        )
        query = Query(
            kind="meat-supply",
            constraints=(Constraint("product", "equals", self.config.product),)
            + self._vendor_constraints(min_performance, radius_km),
        )
        max_price = self.config.max_price if max_unit_price is None else max_unit_price

        def on_results(ctx, results):
            if not results:
                self._finish_process(ctx, process_id, "no-supplier-found")
                return
            participants = [AgentAddress(d.owner) for d in results]
            dialogue, actions = cn_initiate(
                ctx.address,
                participants,
                {"order": {
                    "order_id": order_id,
                    "buyer": ctx.name,
                    "product": self.config.product,
                    "quantity": quantity,
                    "delivery_address": list(self.config.location),
                }},
                self.config.cfp_deadline_ms,
                process_id,
                "meat-trade",
                ctx.now_ms(),
            )
            self.listen(process_id, self._replenishment_listener(process_id, max_price))
            self.run_dialogue(ctx, dialogue, actions)

        def on_timeout(ctx):
            self._finish_process(ctx, process_id, "discovery-unreachable")

        self.search_services(
            ctx, self.config.oef, query, on_results, on_timeout=on_timeout
        )
        return process_id

    def _replenishment_listener(self, process_id: str, max_price: float):
        def listener(ctx, dialogue, event, data):
            if event == "select":
                self._select_winner(ctx, dialogue, process_id, data, max_price)
            elif event == "inform":
                receipt = (data.content or {}).get("receipt") or {}
                quantity = receipt.get("quantity", 0)
                if quantity:
                    self._set_inventory(
                        ctx, apply_inbound(self.inventory, quantity), quantity,
                        f"inbound:{receipt.get('order_id', '')}",
                    )
                ctx.publish(
                    "notification",
                    {"event": "delivery-completed", "process": process_id,
                     "agent": ctx.name,
                     "tracking_number": receipt.get("tracking_number", "")},
                )
                self._finish_process(ctx, process_id, "fulfilled")
            elif event == "failure":
                self._finish_process(ctx, process_id, "delivery-failure")
            elif event == "timeout":
                self._finish_process(ctx, process_id, "negotiation-timeout")
            elif event == "all-refused":
                self._finish_process(ctx, process_id, "all-refused")

        return listener

    def _select_winner(self, ctx, dialogue, process_id, proposals, max_price) -> None:
        params = StrategyParams(max_price=max_price)
        candidates = []
        for name, content in proposals.items():
            try:
                proposal = Proposal.from_content((content or {}).get("proposal") or {})
            except (KeyError, TypeError, ValueError):
                continue
            if proposal.delivery_options:
                candidates.append(proposal)
        try:
            winner = evaluate_proposals(candidates, params)
        except NoAcceptableProposal:
            new, actions = cn_reject_all(dialogue, "no-acceptable-proposal", ctx.now_ms())
            self.run_dialogue(ctx, new, actions)
            self._finish_process(ctx, process_id, "no-acceptable-proposal")
            return
        option = select_delivery_option(list(winner.delivery_options))
        new, actions = cn_award(
            dialogue,
            AgentAddress(winner.proposer),
            ctx.now_ms(),
            extra={"delivery_option": option.option_id},
        )
        self.run_dialogue(ctx, new, actions)
        ctx.publish(
            "notification",
            {"event": "dialogue-completed", "process": process_id,
             "agent": ctx.name, "winner": winner.proposer,
             "unit_price": winner.unit_price, "delivery_option": option.option_id},
        )

    def _finish_process(self, ctx, process_id: str, outcome: str) -> None:
        self.processes.pop(process_id, None)
        self.replenishing.discard(self.inventory.product)
        ctx.publish(
            "notification",
            {"event": "process-outcome", "process": process_id,
             "agent": ctx.name, "outcome": outcome},
        )

    # --- wholesale (participant / seller) ---

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
                unit_price=order["unit_price"],
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
        self.sales[po.order_id] = {
            "conversation": conversation,
            "quantity": po.quantity,
            "buyer": po.buyer,
            "destination": list(po.delivery_address),
        }
        proposal = Proposal(
            proposer=ctx.name,
            order_id=po.order_id,
            unit_price=po.unit_price,
            quantity=po.quantity,
        )
        new, actions = cn_respond_propose(
            dialogue, {"proposal": proposal.to_content()}, ctx.now_ms()
        )
        self.run_dialogue(ctx, new, actions)
        self.listen(conversation, self._sale_listener(po.order_id))
        # Reservation just lowered free stock; the trigger clause applies now.
        self._maybe_replenish(ctx)

    def _refuse(self, ctx, conversation: str, reason: str) -> None:
        dialogue = self.dialogues.get(conversation)
        if dialogue is None:
            return
        new, actions = cn_respond_refuse(dialogue, reason, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)

    def _sale_listener(self, order_id: str):
        def listener(ctx, dialogue, event, data):
            if event == "awarded":
                self._dispatch_sale(ctx, order_id)
            elif event == "rejected":
                sale = self.sales.pop(order_id, None)
                if sale is not None:
                    self._set_inventory(
                        ctx, release(self.inventory, sale["quantity"]), 0.0,
                        f"release:{order_id}",
                    )

        return listener

    def _dispatch_sale(self, ctx, order_id: str) -> None:
        """Book the predetermined delivery option and ship the goods."""
        sale = self.sales.get(order_id)
        if sale is None:
            return
        option_id = (
            self.predetermined_option.option_id
            if self.predetermined_option is not None
            else ""
        )

        def on_booked(ctx, env):
            body = env.content or {}
            tracking = body.get("tracking_number")
            if not tracking:
                self._fail_sale(ctx, order_id, body.get("error", "booking-failed"))
                return
            sale["tracking"] = tracking
            self._sales_by_tracking[tracking] = order_id
            outbound = apply_outbound(self.inventory, sale["quantity"])
            self._set_inventory(ctx, outbound, -sale["quantity"], f"outbound:{order_id}")
            ctx.publish(
                "notification",
                {"event": "delivery-commencing", "agent": ctx.name,
                 "process": sale["conversation"], "order_id": order_id,
                 "tracking_number": tracking, "carrier": body.get("carrier", "")},
            )
            self._maybe_replenish(ctx)

        def on_timeout(ctx):
            self._fail_sale(ctx, order_id, "logistics-unavailable")

        self.request(
            ctx,
            AgentAddress(self.config.logistics),
            "post",
            "logistics",
            {"task": "delivery-order",
             "order_id": order_id,
             "option_id": option_id,
             "origin": list(self.config.location),
             "destination": sale["destination"],
             "quantity": sale["quantity"],
             "requester": ctx.name,
             "recipient": sale["buyer"]},
            on_response=on_booked,
            on_timeout=on_timeout,
            timeout_ms=self.config.request_timeout_ms,
        )

    def _fail_sale(self, ctx, order_id: str, reason: str) -> None:
        sale = self.sales.pop(order_id, None)
        if sale is None:
            return
        if "tracking" not in sale:
            self._set_inventory(
                ctx, release(self.inventory, sale["quantity"]), 0.0, f"release:{order_id}"
            )
        dialogue = self.dialogues.get(sale["conversation"])
        if dialogue is not None:
            new, actions = cn_fail(dialogue, {"reason": reason}, ctx.now_ms())
            self.run_dialogue(ctx, new, actions)

    # --- requests: operator orders and delivery status ---

    def on_request(self, ctx, dialogue, env):
        content = env.content or {}
        if content.get("resource") == "price":
            # information query service: advertised wholesale price
            if content.get("product") not in (None, self.config.product):
                self.respond(ctx, dialogue, {"error": "product-not-carried"})
            else:
                self.respond(ctx, dialogue, {"product": self.config.product,
                                             "unit_price": self.config.expected_price})
            return
        if content.get("type") == "place-order" and env.ontology == "meat-trade":
            order = content.get("order") or {}
            quantity = order.get("quantity", 0)
            if not isinstance(quantity, (int, float)) or quantity <= 0:
                self.respond(ctx, dialogue, {"type": "error", "reason": "validation-error"})
                return
            process_id = self.start_replenishment(
                ctx, quantity, order.get("unit_price"),
                min_performance=order.get("min_performance"),
                radius_km=order.get("radius_km"),
            )
            self.respond(ctx, dialogue, {"type": "order-accepted", "order": {"process": process_id}})
            return
        if content.get("task") == "delivery-status":
            tracking = content.get("tracking_number", "")
            status = content.get("status", "")
            self.respond(ctx, dialogue, {"status": "ok"})
            order_id = self._sales_by_tracking.get(tracking)
            if order_id is None:
                return
            if status == "delivered":
                self._complete_sale(ctx, order_id, tracking)
            elif status == "failed":
                self._fail_sale(ctx, order_id, "delivery-failure")
            return
        self.respond(ctx, dialogue, {"error": "not-supported"})

    def _complete_sale(self, ctx, order_id: str, tracking: str) -> None:
        sale = self.sales.pop(order_id, None)
        self._sales_by_tracking.pop(tracking, None)
        if sale is None:
            return
        dialogue = self.dialogues.get(sale["conversation"])
        if dialogue is None:
            return
        receipt = {
            "type": "receipt",
            "receipt": {
                "order_id": order_id,
                "quantity": sale["quantity"],
                "tracking_number": tracking,
                "status": "delivered",
            },
        }
        new, actions = cn_complete(dialogue, receipt, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)


def build_wholesaler_agent(system: System, config: WholesalerConfig):
    skill = WholesalerSkill(config)
    status = StatusSkill(skill.inventory_overview)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill, status],
    )
    return agent, skill
