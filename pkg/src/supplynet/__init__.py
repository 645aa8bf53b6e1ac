"""Agent-based supply chain automation toolkit.

Autonomous trading agents (suppliers, wholesalers, retailers, logistics,
third-party fulfilment, admin) negotiate over contract-net and
request/response protocols, discover each other through a matchmaking
registry, replay recorded cold-chain journeys as monitored deliveries, and
expose the whole network to an operator through a gateway and CLI.
"""

__version__ = "0.1.0"
