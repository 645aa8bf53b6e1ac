"""Generic agent shell and system driver.

Each agent owns a FIFO mailbox, a heap of timers, and a set of skills
(reactive handlers plus proactive behaviours plus a strategy slot).  A
single sequential event loop per agent processes envelopes, timer firings,
and task completions, so skill state never needs locking.

Two execution modes share the same agents:

* threaded (real or scaled clock): every agent loop runs on its own thread,
  timers fire off wall-time waits — used by demos and the gateway;
* virtual clock: no threads at all; the :class:`System` pumps mailboxes and
  advances time to the next due timer from the calling thread, which makes
  whole scenario runs deterministic and replayable.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import queue
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

from .clock import Clock, RealClock, VirtualClock, WrongClockMode
from .events import EventSink
from .messaging import AgentAddress, Envelope, Performative, make_envelope
from .ontology import OntologyRegistry, default_ontologies
from .protocols import (
    Close,
    DialogueAction,
    DialogueManager,
    NotifyOwner,
    Send,
    SetTimer,
    TimerExpiry,
)

__all__ = [
    "AgentConfig",
    "AgentStopped",
    "Agent",
    "Behaviour",
    "DuplicateAddress",
    "DiscoveryUnreachable",
    "Router",
    "Skill",
    "System",
    "Task",
]

log = logging.getLogger(__name__)

_STOP = object()


class AgentStopped(RuntimeError):
    pass


class DuplicateAddress(ValueError):
    pass


class DiscoveryUnreachable(RuntimeError):
    pass


@dataclass
class Behaviour:
    """Proactive action: one-shot (interval None) or periodic."""

    name: str
    action: Callable[["AgentContext", int], None]
    interval_ms: int | None = None


class Task:
    """Handle for long-running work executed off the event loop."""

    _ids = itertools.count(1)

    def __init__(self, name: str = ""):
        self.id = f"task-{next(self._ids)}"
        self.name = name
        self.status = "running"
        self.result: Any = None
        self.error: str | None = None

    def done(self) -> bool:
        return self.status != "running"


class Skill:
    """Base skill: reactive handlers, proactive behaviours, dialogue table.

    Subclasses override :meth:`handlers` (protocol id -> handler) and
    :meth:`behaviours`; decision logic lives in a strategy object on the
    concrete skill, shared state in plain attributes.
    """

    name = "skill"
    # When set, server-side dispatch only offers this skill envelopes whose
    # ontology is listed; dialogue-owned envelopes always reach their owner.
    ontologies: tuple[str, ...] | None = None

    def __init__(self):
        self.dialogues = DialogueManager()

    def setup(self, ctx: "AgentContext") -> None:
        pass

    def handlers(self) -> dict[str, Callable[["AgentContext", Envelope], None]]:
        return {}

    def behaviours(self) -> list[Behaviour]:
        return []

    def on_dialogue_event(
        self, ctx: "AgentContext", dialogue: Any, event: str, data: Any
    ) -> None:
        """Owner notification hook for dialogue transitions."""

    # --- dialogue glue ---

    def run_dialogue(
        self, ctx: "AgentContext", dialogue: Any, actions: list[DialogueAction]
    ) -> None:
        """Store the new dialogue state and execute transition actions."""
        self.dialogues.put(dialogue)
        closed = False
        for action in actions:
            if isinstance(action, Send):
                ctx.send(action.envelope)
            elif isinstance(action, SetTimer):
                conversation = dialogue.conversation
                due = action.deadline
                ctx.set_timer(due, lambda now, c=conversation, d=due: self._on_dialogue_timer(ctx, c, d, now))
            elif isinstance(action, NotifyOwner):
                current = self.dialogues.get(dialogue.conversation) or dialogue
                self.on_dialogue_event(ctx, current, action.event, action.data)
            elif isinstance(action, Close):
                closed = True
        if closed:
            self.dialogues.remove(dialogue.conversation)

    def step_dialogue(self, ctx: "AgentContext", inp: Envelope | TimerExpiry) -> bool:
        """Route an input to its dialogue, if this skill owns one for it."""
        from .protocols import ContractNetDialogue, cn_step, rr_step

        conversation = inp.conversation
        dialogue = self.dialogues.get(conversation)
        if dialogue is None:
            return False
        step = cn_step if isinstance(dialogue, ContractNetDialogue) else rr_step
        new, actions = step(dialogue, inp, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)
        return True

    def _on_dialogue_timer(self, ctx, conversation: str, due: int, now: int) -> None:
        if self.dialogues.get(conversation) is None:
            return  # dialogue already closed
        self.step_dialogue(ctx, TimerExpiry(conversation, due))


@dataclass
class AgentConfig:
    """Runtime identity of one agent; domain parameters live in skills."""

    name: str
    seed: int = 0
    discovery: str | None = None
    endpoint: str = ""

    def address(self) -> AgentAddress:
        return AgentAddress(self.name, self.endpoint or f"local:{self.name}")


class AgentContext:
    """Capabilities handed to skills: messaging, timers, tasks, events."""

    def __init__(self, agent: "Agent"):
        self._agent = agent
        self.address = agent.address
        self.name = agent.name
        self.rng = agent.rng

    @property
    def system(self) -> "System":
        return self._agent.system

    def now_ms(self) -> int:
        return self._agent.system.clock.now_ms()

    def make(
        self,
        receiver: AgentAddress,
        protocol: str,
        ontology: str,
        conversation: str,
        performative: Performative,
        content: Any,
        reply_with: str | None = None,
        in_reply_to: str | None = None,
    ) -> Envelope:
        return make_envelope(
            self.address,
            receiver,
            protocol,
            ontology,
            conversation,
            performative,
            content,
            self.now_ms(),
            reply_with=reply_with,
            in_reply_to=in_reply_to,
            ontologies=self._agent.system.ontologies,
        )

    def send(self, env: Envelope) -> bool:
        # Outbound envelopes must honor their declared vocabulary, including
        # those assembled inside the pure protocol transitions.
        self._agent.system.ontologies.validate(env.ontology, env.content)
        return self._agent.system.router.route(env)

    def new_conversation(self) -> str:
        return self._agent.new_conversation()

    def set_timer(self, due_ms: int, fn: Callable[[int], None]) -> None:
        self._agent.set_timer(due_ms, fn)

    def submit_task(
        self,
        work: Callable[[], Any],
        on_done: Callable[["AgentContext", Task], None] | None = None,
        name: str = "",
    ) -> Task:
        return self._agent.submit_task(work, on_done, name)

    def publish(self, kind: str, payload: dict[str, Any]) -> None:
        self._agent.system.sink.publish(kind, payload)

    def open_dialogues(self) -> int:
        return sum(len(s.dialogues) for s in self._agent.skills)


class Agent:
    """One autonomous agent: address, mailbox, skills, timers, event loop."""

    def __init__(self, system: "System", config: AgentConfig, skills: list[Skill]):
        self.system = system
        self.config = config
        self.name = config.name
        self.address = config.address()
        self.skills = list(skills)
        self.rng = random.Random(config.seed)
        self.mailbox: queue.Queue = queue.Queue()
        self._tasks: dict[str, Task] = {}
        self._timers: list[tuple[int, int, Callable[[int], None]]] = []
        self._timer_seq = itertools.count()
        self._conversation_seq = itertools.count(1)
        self._running = False
        self._thread: threading.Thread | None = None
        self.ctx = AgentContext(self)
        self.processed_envelopes = 0

    # --- lifecycle ---

    def start(self) -> None:
        self._running = True
        for skill in self.skills:
            skill.setup(self.ctx)
        now = self.system.clock.now_ms()
        for skill in self.skills:
            for behaviour in skill.behaviours():
                if behaviour.interval_ms is None:
                    # One-shot behaviours run first thing on the event loop.
                    self.mailbox.put(("behaviour", behaviour))
                else:
                    self._schedule_behaviour(behaviour, now + behaviour.interval_ms)

    def stop(self) -> None:
        if not self._running:
            return
        self._running = False
        self.mailbox.put(_STOP)
        self.system.router.unregister(self.name)

    @property
    def running(self) -> bool:
        return self._running

    def deliver(self, env: Envelope) -> None:
        if not self._running:
            raise AgentStopped(self.name)
        self.mailbox.put(("envelope", env))

    def new_conversation(self) -> str:
        return f"{self.name}/{next(self._conversation_seq)}"

    def tick(self, now_ms: int) -> None:
        """Advance virtual time (system-wide: timers fire in timestamp order)."""
        self.system.tick(now_ms)

    # --- timers ---

    def set_timer(self, due_ms: int, fn: Callable[[int], None]) -> None:
        heapq.heappush(self._timers, (int(due_ms), next(self._timer_seq), fn))

    def next_timer_due(self) -> int | None:
        return self._timers[0][0] if self._timers else None

    def fire_due_timers(self, now: int) -> bool:
        fired = False
        while self._timers and self._timers[0][0] <= now:
            _, _, fn = heapq.heappop(self._timers)
            fired = True
            try:
                fn(now)
            except Exception:
                log.exception("%s: timer callback failed", self.name)
        return fired

    def _schedule_behaviour(self, behaviour: Behaviour, due: int) -> None:
        def fire(now: int, b: Behaviour = behaviour, scheduled: int = due) -> None:
            try:
                b.action(self.ctx, now)
            except Exception:
                log.exception("%s: behaviour %s failed", self.name, b.name)
            if b.interval_ms is not None and self._running:
                self._schedule_behaviour(b, scheduled + b.interval_ms)

        self.set_timer(due, fire)

    # --- tasks ---

    def poll_task(self, task_id: str) -> str:
        task = self._tasks.get(task_id)
        if task is None:
            raise KeyError(f"unknown task {task_id!r}")
        return task.status

    def submit_task(self, work, on_done=None, name: str = "") -> Task:
        if not self._running:
            raise AgentStopped(self.name)
        task = Task(name)
        self._tasks[task.id] = task

        def run() -> None:
            try:
                outcome = ("done", work())
            except Exception as exc:  # noqa: BLE001 - task errors become status
                outcome = ("failed", str(exc))
            self.mailbox.put(("task-done", task, outcome, on_done))

        self.system.pool.submit(run)
        return task

    # --- event processing ---

    def process_mail(self, item: Any) -> None:
        kind = item[0]
        if kind == "envelope":
            self.processed_envelopes += 1
            self._dispatch_envelope(item[1])
        elif kind == "behaviour":
            behaviour = item[1]
            try:
                behaviour.action(self.ctx, self.system.clock.now_ms())
            except Exception:
                log.exception("%s: behaviour %s failed", self.name, behaviour.name)
        elif kind == "task-done":
            _, task, (status, value), on_done = item
            task.status = status
            if status == "done":
                task.result = value
            else:
                task.error = value
            if on_done is not None:
                try:
                    on_done(self.ctx, task)
                except Exception:
                    log.exception("%s: task callback failed", self.name)

    def _dispatch_envelope(self, env: Envelope) -> None:
        # Dialogue-owned conversations go straight to their owning skill.
        for skill in self.skills:
            if skill.dialogues.get(env.conversation) is not None:
                handler = skill.handlers().get(env.protocol)
                if handler is not None:
                    handler(self.ctx, env)
                    return
        for skill in self.skills:
            handler = skill.handlers().get(env.protocol)
            if handler is None:
                continue
            if skill.ontologies is not None and env.ontology not in skill.ontologies:
                continue
            handler(self.ctx, env)
            return
        self.system.sink.publish(
            "status",
            {
                "event": "orphan-envelope",
                "agent": self.name,
                "protocol": env.protocol,
                "conversation": env.conversation,
            },
        )

    def drain_mailbox(self) -> bool:
        """Process everything currently queued (virtual-clock mode)."""
        did = False
        while True:
            try:
                item = self.mailbox.get_nowait()
            except queue.Empty:
                return did
            if item is _STOP:
                return did
            did = True
            try:
                self.process_mail(item)
            except Exception:
                log.exception("%s: event processing failed", self.name)

    # --- threaded loop ---

    def start_thread(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, name=f"agent-{self.name}", daemon=True)
        self._thread.start()

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _loop(self) -> None:
        clock = self.system.clock
        while self._running:
            self.fire_due_timers(clock.now_ms())
            due = self.next_timer_due()
            wait = clock.wall_seconds_until(due) if due is not None else 0.2
            wait = min(max(wait, 0.0005), 0.2)
            try:
                item = self.mailbox.get(timeout=wait)
            except queue.Empty:
                continue
            if item is _STOP:
                break
            try:
                self.process_mail(item)
            except Exception:
                log.exception("%s: event processing failed", self.name)


class Router:
    """Name-to-mailbox routing plus the mirror tap every delivery feeds."""

    def __init__(self, sink: EventSink):
        self._lock = threading.Lock()
        self._routes: dict[str, Agent] = {}
        self._sink = sink
        self.taps: list[Callable[[Envelope], None]] = []

    def register(self, agent: Agent) -> None:
        with self._lock:
            if agent.name in self._routes:
                raise DuplicateAddress(agent.name)
            self._routes[agent.name] = agent

    def unregister(self, name: str) -> None:
        with self._lock:
            self._routes.pop(name, None)

    def knows(self, name: str) -> bool:
        with self._lock:
            return name in self._routes

    def route(self, env: Envelope) -> bool:
        with self._lock:
            target = self._routes.get(env.receiver.name)
        if target is None:
            self._sink.publish(
                "status",
                {"event": "undeliverable", "receiver": env.receiver.name,
                 "conversation": env.conversation},
            )
            return False
        try:
            target.deliver(env)
        except AgentStopped:
            self._sink.publish(
                "status",
                {"event": "undeliverable", "receiver": env.receiver.name,
                 "conversation": env.conversation},
            )
            return False
        for tap in list(self.taps):
            tap(env)
        self._sink.publish(
            "chat",
            {
                "sender": env.sender.name,
                "recipient": env.receiver.name,
                "performative": env.performative.wire(),
                "body": env.content,
                "conversation": env.conversation,
                "protocol": env.protocol,
                "ontology": env.ontology,
                "timestamp": env.timestamp,
            },
        )
        return True


class System:
    """Owns the clock, router, event sink, task pool, and all agents."""

    def __init__(
        self,
        clock: Clock | None = None,
        sink: EventSink | None = None,
        ontologies: OntologyRegistry | None = None,
    ):
        self.clock = clock or RealClock()
        self.sink = sink or EventSink()
        self.ontologies = ontologies if ontologies is not None else default_ontologies()
        self.router = Router(self.sink)
        self.pool = ThreadPoolExecutor(max_workers=8, thread_name_prefix="supplynet-task")
        self.agents: dict[str, Agent] = {}
        self._threaded = False

    # --- lifecycle ---

    def spawn_agent(self, config: AgentConfig, skills: list[Skill]) -> Agent:
        if config.name in self.agents:
            raise DuplicateAddress(config.name)
        if config.discovery is not None and not self.router.knows(config.discovery):
            raise DiscoveryUnreachable(config.discovery)
        agent = Agent(self, config, skills)
        self.router.register(agent)
        self.agents[config.name] = agent
        agent.start()
        if self._threaded:
            agent.start_thread()
        return agent

    def start(self) -> None:
        """Enter threaded mode: every agent loop runs on its own thread."""
        if self.clock.virtual:
            raise WrongClockMode("threaded mode needs a real or scaled clock")
        self._threaded = True
        for agent in self.agents.values():
            agent.start_thread()

    def stop(self) -> None:
        for agent in self.agents.values():
            agent.stop()
        if self._threaded:
            for agent in self.agents.values():
                agent.join(timeout=2.0)
        self.pool.shutdown(wait=False)

    def deliver(self, name: str, env: Envelope) -> None:
        agent = self.agents.get(name)
        if agent is None or not agent.running:
            raise AgentStopped(name)
        agent.deliver(env)

    # --- virtual-clock driving ---

    def _require_virtual(self) -> VirtualClock:
        if not isinstance(self.clock, VirtualClock):
            raise WrongClockMode("virtual clock required")
        return self.clock

    def pump(self) -> bool:
        """One deterministic pass: fire due timers, drain every mailbox."""
        now = self.clock.now_ms()
        did = False
        for agent in list(self.agents.values()):
            if not agent.running:
                continue
            did |= agent.fire_due_timers(now)
            did |= agent.drain_mailbox()
        return did

    def step_until_idle(self, max_rounds: int = 100_000) -> None:
        for _ in range(max_rounds):
            if not self.pump():
                return
        raise RuntimeError("system did not quiesce (message storm?)")

    def next_timer_due(self) -> int | None:
        dues = [
            a.next_timer_due()
            for a in self.agents.values()
            if a.running and a.next_timer_due() is not None
        ]
        return min(dues) if dues else None

    def tick(self, now_ms: int) -> None:
        """Advance virtual time to ``now_ms``, firing everything due on the way."""
        clock = self._require_virtual()
        while True:
            self.step_until_idle()
            due = self.next_timer_due()
            if due is None or due > now_ms:
                break
            clock.advance_to(max(due, clock.now_ms()))
            self.step_until_idle()
        clock.advance_to(max(now_ms, clock.now_ms()))
        self.step_until_idle()

    def run_virtual(
        self,
        until: Callable[[], bool] | None = None,
        max_ms: int = 3_600_000,
    ) -> bool:
        """Drive a virtual-clock system until ``until()`` or timer exhaustion.

        Returns True when ``until`` was satisfied (or no condition given and
        the system quiesced), False when the virtual horizon ran out first.
        """
        clock = self._require_virtual()
        while True:
            self.step_until_idle()
            if until is not None and until():
                return True
            due = self.next_timer_due()
            if due is None:
                return until is None
            if due > max_ms:
                return False
            clock.advance_to(max(due, clock.now_ms()))
