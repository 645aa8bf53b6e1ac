"""Retailer agent: buys meat from wholesalers on operator demand.

Initiator side of the wholesale process: discovers wholesalers, calls for
proposals with its offered price, awards the cheapest acceptable one, and
books the goods in on the delivery receipt.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..discovery import Constraint, Query, ServiceDescription
from ..inventory import InventoryRecord, apply_inbound
from ..messaging import CONTRACT_NET, DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..orders import Proposal
from ..protocols import cn_award, cn_initiate, cn_reject_all
from ..runtime import AgentConfig, System
from ..strategy import NoAcceptableProposal, StrategyParams, evaluate_proposals
from .common import (
    DEFAULT_CFP_DEADLINE_MS,
    CallbackSkill,
    StatusSkill,
    registration_behaviour,
)

__all__ = ["RetailerConfig", "RetailerSkill", "build_retailer_agent"]


@dataclass
class RetailerConfig:
    name: str
    product: str = "beef"
    offered_price: float = 10.0  # unit price written on outgoing orders
    max_price: float = 12.0
    location: tuple[float, float] = (52.1951, 0.1313)
    performance: float = 0.8
    min_vendor_performance: float = 0.5
    vendor_radius_km: float = 50.0
    oef: str = "oef"
    seed: int = 0
    cfp_deadline_ms: int = DEFAULT_CFP_DEADLINE_MS


class RetailerSkill(CallbackSkill):
    name = "meat-retail"
    ontologies = ("meat-trade",)
    protocols = (CONTRACT_NET, REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: RetailerConfig):
        super().__init__()
        self.config = config
        self.strategy = StrategyParams(
            max_price=config.max_price,
            vendor_constraints=(
                Constraint("performance", "in-range", (config.min_vendor_performance, 1.0)),
                Constraint("location", "within-km",
                           (config.location, config.vendor_radius_km)),
            ),
        )
        self.inventory = InventoryRecord(product=config.product)
        self.processes: dict[str, dict[str, Any]] = {}
        self._order_seq = 0

    def behaviours(self):
        return [registration_behaviour(self, self.config.oef, self._description)]

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(
            owner=ctx.name,
            kind="meat-retail",
            attributes={
                "product": self.config.product,
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

    # --- wholesale purchase (initiator) ---

    def start_purchase(
        self,
        ctx,
        quantity: float,
        unit_price: float | None = None,
        min_performance: float | None = None,
        radius_km: float | None = None,
    ) -> str:
        process_id = ctx.new_conversation()
        self._order_seq += 1
        order_id = f"{ctx.name}-po-{self._order_seq}"
        offered = self.config.offered_price if unit_price is None else unit_price
        self.processes[process_id] = {"order_id": order_id, "quantity": quantity}
        ctx.publish(
            "notification",
            {"event": "process-started", "process": process_id,
             "scenario": "wholesale", "agent": ctx.name,
             "order_id": order_id, "quantity": quantity},
        )
        performance = (
            self.config.min_vendor_performance
            if min_performance is None else min_performance
        )
        radius = self.config.vendor_radius_km if radius_km is None else radius_km
        query = Query(
            kind="meat-wholesale",
            constraints=(
                Constraint("product", "equals", self.config.product),
                Constraint("performance", "in-range", (performance, 1.0)),
                Constraint("location", "within-km", (self.config.location, radius)),
            ),
        )

        def on_results(ctx, results):
            if not results:
                self._finish(ctx, process_id, "no-wholesaler-found")
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
                    "unit_price": offered,
                    "delivery_address": list(self.config.location),
                }},
                self.config.cfp_deadline_ms,
                process_id,
                "meat-trade",
                ctx.now_ms(),
            )
            self.listen(process_id, self._purchase_listener(process_id))
            self.run_dialogue(ctx, dialogue, actions)

        def on_timeout(ctx):
            self._finish(ctx, process_id, "discovery-unreachable")

        self.search_services(ctx, self.config.oef, query, on_results, on_timeout)
        return process_id

    def _purchase_listener(self, process_id: str):
        def listener(ctx, dialogue, event, data):
            if event == "select":
                self._award(ctx, dialogue, process_id, data)
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
                self._finish(ctx, process_id, "fulfilled")
            elif event == "failure":
                self._finish(ctx, process_id, "delivery-failure")
            elif event == "timeout":
                self._finish(ctx, process_id, "negotiation-timeout")
            elif event == "all-refused":
                reasons = list(data) if data else []
                self._finish(ctx, process_id, "order-rejected", {"refused_by": reasons})

        return listener

    def _award(self, ctx, dialogue, process_id, proposals) -> None:
        candidates = []
        for name, content in proposals.items():
            try:
                candidates.append(Proposal.from_content((content or {}).get("proposal") or {}))
            except (KeyError, TypeError, ValueError):
                continue
        try:
            winner = evaluate_proposals(candidates, self.strategy)
        except NoAcceptableProposal:
            new, actions = cn_reject_all(dialogue, "price-above-max", ctx.now_ms())
            self.run_dialogue(ctx, new, actions)
            self._finish(ctx, process_id, "no-acceptable-proposal")
            return
        new, actions = cn_award(dialogue, AgentAddress(winner.proposer), ctx.now_ms())
        self.run_dialogue(ctx, new, actions)
        ctx.publish(
            "notification",
            {"event": "dialogue-completed", "process": process_id,
             "agent": ctx.name, "winner": winner.proposer,
             "unit_price": winner.unit_price},
        )

    def _finish(
        self, ctx, process_id: str, outcome: str, detail: dict | None = None
    ) -> None:
        self.processes.pop(process_id, None)
        payload = {"event": "process-outcome", "process": process_id,
                   "agent": ctx.name, "outcome": outcome}
        if detail:
            payload.update(detail)
        ctx.publish("notification", payload)

    # --- operator orders ---

    def on_request(self, ctx, dialogue, env):
        content = env.content or {}
        if content.get("type") != "place-order":
            self.respond(ctx, dialogue, {"type": "error", "reason": "not-supported"})
            return
        order = content.get("order") or {}
        quantity = order.get("quantity", 0)
        if not isinstance(quantity, (int, float)) or quantity <= 0:
            self.respond(ctx, dialogue, {"type": "error", "reason": "validation-error"})
            return
        process_id = self.start_purchase(
            ctx, quantity, order.get("unit_price"),
            min_performance=order.get("min_performance"),
            radius_km=order.get("radius_km"),
        )
        self.respond(ctx, dialogue, {"type": "order-accepted", "order": {"process": process_id}})


def build_retailer_agent(system: System, config: RetailerConfig):
    skill = RetailerSkill(config)
    status = StatusSkill(skill.inventory_overview)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill, status],
    )
    return agent, skill
