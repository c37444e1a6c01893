"""Round-based execution of monitor nodes over a shared logical clock.

Each round: deliver due verdict messages, poll the trace into per-node
memories, then let every node expand/resolve its encoding.  When a node
concludes a final verdict for the round it is checking, it reports the
verdict, notifies dependent monitors, garbage-collects its memory, and
respawns at the next round.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import ehe as ehe_mod
from . import synthesis
from .ehe import EAGER, EHE, WILDCARD
from .expr import Atom, SimplifyStats
from .memory import Memory
from .registry import Registry
from .verdicts import Verdict


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    timestamp: int
    verdict: bool
    send_round: int


@dataclass(frozen=True)
class DeliveryPolicy:
    """immediate: next round; delay: fixed extra rounds; reorder: random
    extra delay in [0, delay], drawn from the simulation seed."""

    mode: str = "immediate"
    delay: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("immediate", "delay", "reorder"):
            raise SimulationError(f"unknown delivery mode {self.mode!r}")
        if self.delay < 0:
            raise SimulationError("delivery delay must be non-negative")

    def delivery_round(self, send_round: int, rng: random.Random) -> int:
        if self.mode == "immediate":
            return send_round + 1
        if self.mode == "delay":
            return send_round + 1 + self.delay
        return send_round + 1 + rng.randint(0, self.delay)


@dataclass(frozen=True)
class VerdictRecord:
    verdict: Verdict
    delay: int
    truncated: bool = False


@dataclass
class SimulationReport:
    rounds: int
    verdicts: dict[str, dict[int, VerdictRecord]]
    messages_per_round: list[int]
    simplifications_per_round: list[int]
    max_ehe_size_per_round: list[int]
    max_ehe_entries_per_round: list[int]
    memory_per_round: list[int] = field(default_factory=list)

    @property
    def total_messages(self) -> int:
        return sum(self.messages_per_round)

    @property
    def peak_memory(self) -> int:
        """Largest total observation-store cardinality across all nodes."""
        return max(self.memory_per_round, default=0)

    def verdict_values(self) -> dict[str, dict[int, Verdict]]:
        return {
            label: {t: rec.verdict for t, rec in log.items()}
            for label, log in self.verdicts.items()
        }

    def measured_steady_rate(self, warmup: int) -> float:
        window = self.messages_per_round[warmup:]
        if not window:
            return 0.0
        return sum(window) / len(window)

    def verdicts_csv(self) -> str:
        lines = ["round,label,verdict,delay"]
        for label in sorted(self.verdicts):
            for t in sorted(self.verdicts[label]):
                rec = self.verdicts[label][t]
                lines.append(f"{t},{label},{rec.verdict},{rec.delay}")
        return "\n".join(lines) + "\n"

    def metrics_csv(self) -> str:
        lines = ["round,msgs,simplifications,max_ehe_nodes"]
        for r in range(self.rounds):
            lines.append(
                f"{r},{self.messages_per_round[r]},"
                f"{self.simplifications_per_round[r]},"
                f"{self.max_ehe_size_per_round[r]}"
            )
        return "\n".join(lines) + "\n"

    def summary_txt(self) -> str:
        n = max(self.rounds, 1)
        finals = sum(
            1
            for log in self.verdicts.values()
            for rec in log.values()
            if rec.verdict.final
        )
        lines = [
            f"rounds {self.rounds}",
            f"monitors {len(self.verdicts)}",
            f"final_verdicts {finals}",
            f"total_messages {self.total_messages}",
            f"msgs_per_round {self.total_messages / n:.4f}",
            f"simplifications_per_round {sum(self.simplifications_per_round) / n:.4f}",
            f"max_ehe_nodes {max(self.max_ehe_size_per_round, default=0)}",
            f"max_ehe_entries {max(self.max_ehe_entries_per_round, default=0)}",
        ]
        return "\n".join(lines) + "\n"

    def timeline_tsv(self) -> str:
        """Per-label inclusive round intervals where the verdict was TRUE."""
        lines = ["label\tstart\tend"]
        for label in sorted(self.verdicts):
            log = self.verdicts[label]
            start: Optional[int] = None
            prev: Optional[int] = None
            for t in sorted(log):
                if log[t].verdict is Verdict.TRUE:
                    if start is None or (prev is not None and t != prev + 1):
                        if start is not None:
                            lines.append(f"{label}\t{start}\t{prev}")
                        start = t
                    prev = t
                elif start is not None:
                    lines.append(f"{label}\t{start}\t{prev}")
                    start = None
            if start is not None:
                lines.append(f"{label}\t{start}\t{prev}")
        return "\n".join(lines) + "\n"


@dataclass
class _Node:
    label: str
    monitor: synthesis.MooreMonitor
    own_props: frozenset[str]
    dependents: list[str]
    expansion: object
    memory: Memory = field(default_factory=Memory)
    stats: SimplifyStats = field(default_factory=SimplifyStats)
    t_check: int = 0
    gc_enabled: bool = True
    ehe: EHE = None  # type: ignore[assignment]
    log: dict[int, VerdictRecord] = field(default_factory=dict)
    delivered_now: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.ehe is None:
            self.ehe = EHE(self.monitor, 0)


@dataclass(frozen=True)
class SimulationOptions:
    delivery: DeliveryPolicy = DeliveryPolicy()
    seed: int = 0
    gc_enabled: bool = True
    lazy_enabled: bool = True
    parallel: bool = False
    max_states: Optional[int] = None


def run_simulation(
    registry: Registry,
    trace: list[dict[str, bool]],
    options: SimulationOptions = SimulationOptions(),
) -> SimulationReport:
    nodes = _make_nodes(registry, options)
    if trace:
        missing = {
            (node.label, ap)
            for node in nodes.values()
            for ap in node.own_props
            if ap not in trace[0]
        }
        if missing:
            label, ap = sorted(missing)[0]
            raise SimulationError(f"no trace source for {ap!r} (monitor {label!r})")

    rng = random.Random(options.seed)
    pending: dict[int, list[Message]] = {}
    order = sorted(nodes)
    n = len(trace)
    messages_per_round = []
    simplifications_per_round = []
    max_size_per_round = []
    max_entries_per_round = []
    memory_per_round = []
    prev_simplifications = 0

    for r in range(n):
        # 1. deliver verdict messages that are due
        for msg in pending.pop(r, ()):
            node = nodes[msg.receiver]
            node.memory.store(Atom(msg.timestamp, msg.sender), msg.verdict)
            node.delivered_now.append(msg.timestamp)

        # 2. poll the trace into per-node memories
        event = trace[r]
        for label in order:
            node = nodes[label]
            for ap in node.own_props:
                node.memory.store(Atom(r, ap), event[ap])

        # 3. expand and resolve; conclude/respawn until quiescent
        if options.parallel:
            with ThreadPoolExecutor() as pool:
                results = list(
                    pool.map(lambda l: _step_node(nodes[l], r), order)
                )
            sent = [msg for batch in results for msg in batch]
        else:
            sent = []
            for label in order:
                sent.extend(_step_node(nodes[label], r))

        # 4. queue outgoing messages for later rounds
        for msg in sent:
            due = options.delivery.delivery_round(msg.send_round, rng)
            pending.setdefault(due, []).append(msg)

        messages_per_round.append(len(sent))
        total_simp = sum(node.stats.simplifications for node in nodes.values())
        simplifications_per_round.append(total_simp - prev_simplifications)
        prev_simplifications = total_simp
        max_size_per_round.append(
            max((node.ehe.total_size for node in nodes.values()), default=0)
        )
        max_entries_per_round.append(
            max((node.ehe.n_entries for node in nodes.values()), default=0)
        )
        memory_per_round.append(sum(len(node.memory) for node in nodes.values()))

    # trace end: unresolved rounds stay UNKNOWN, flagged truncated
    for label in order:
        node = nodes[label]
        for t in range(node.t_check, n):
            node.log[t] = VerdictRecord(Verdict.UNKNOWN, n - 1 - t, truncated=True)

    return SimulationReport(
        rounds=n,
        verdicts={label: nodes[label].log for label in order},
        messages_per_round=messages_per_round,
        simplifications_per_round=simplifications_per_round,
        max_ehe_size_per_round=max_size_per_round,
        max_ehe_entries_per_round=max_entries_per_round,
        memory_per_round=memory_per_round,
    )


def _make_nodes(registry: Registry, options: SimulationOptions) -> dict[str, _Node]:
    nodes = {}
    for label, decl in registry.monitors.items():
        expansion = decl.expansion
        if not options.lazy_enabled or not registry.ref_only(label):
            expansion = EAGER
        nodes[label] = _Node(
            label=label,
            monitor=synthesis.build(decl.formula, options.max_states),
            own_props=registry.own_props(label),
            dependents=registry.dependents(label),
            expansion=expansion,
            gc_enabled=options.gc_enabled,
        )
    return nodes


def _expansion_target(node: _Node, r: int) -> Optional[int]:
    """Round to expand the encoding to this step, or None to hold."""
    if node.expansion == EAGER:
        return r + 1
    if node.expansion == WILDCARD:
        if not node.delivered_now:
            return None
        return max(node.delivered_now) + 1
    t_max = node.memory.max_time()
    if t_max is None:
        return None
    # matches at t_last itself still matter: concluding round t needs the
    # encoding expanded to t + 1
    hits = ehe_mod.sadvs(node.expansion, node.memory, node.ehe.t_last - 1, t_max)
    if not hits:
        return None
    return max(hits) + 1


def _step_node(node: _Node, r: int) -> list[Message]:
    out: list[Message] = []
    while True:
        target = _expansion_target(node, r)
        if target is not None and target > node.ehe.t_last:
            node.ehe.smove(target, node.stats, node.memory)
        found = node.ehe.resolve(node.memory, node.stats)
        if found is None:
            break
        _, _, verdict = found
        if not verdict.final or node.t_check > r:
            break
        t = node.t_check
        node.log[t] = VerdictRecord(verdict, r - t)
        for dep in node.dependents:
            out.append(Message(node.label, dep, t, verdict is Verdict.TRUE, r))
        if node.gc_enabled:
            node.memory.gc(t)
        node.t_check = t + 1
        node.ehe = EHE(node.monitor, node.t_check)
    node.delivered_now.clear()
    return out


def steady_state_message_rate(registry: Registry) -> int:
    """Structural prediction: one message per round per DAG edge whose
    source monitor reaches final verdicts at a steady per-round pace
    (finite horizon after inlining)."""
    return sum(
        1 for src, _ in registry.edges() if registry.horizon(src) is not None
    )
