"""The black-box agent boundary: request/response types plus the builtin
deterministic agents used for calibration and as behavioral fixtures."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import UnknownAgent
from .task import TaskSpec

BUILTIN_NAMES = ("replay", "looper", "vandal", "idler", "quitter", "random")


@dataclass(frozen=True)
class AgentRequest:
    task_prompt: str
    turn: int
    history: tuple[tuple[str, str], ...]
    remaining_turns: int
    remaining_time_s: float


@dataclass(frozen=True)
class AgentResponse:
    action: str
    tokens_in: int = 0
    tokens_out: int = 0
    thought: str | None = None


class AgentHandle:
    """One agent bound to one episode. Builtin handles are in-process and
    fully deterministic; wire handles live in wire.py."""

    def __init__(self, agent_id: str, transport: str = "builtin",
                 deadline_s: float | None = None, synthetic: bool = True):
        self.id = agent_id
        self.transport = transport
        self.deadline_s = deadline_s
        self.synthetic = synthetic

    def next_action(self, request: AgentRequest) -> AgentResponse:
        raise NotImplementedError

    def close(self) -> None:
        pass


def next_action(agent: AgentHandle, request: AgentRequest) -> AgentResponse:
    return agent.next_action(request)


class ReplayAgent(AgentHandle):
    """Emits a fixed command list in order, then STOP."""

    def __init__(self, commands, agent_id: str = "replay"):
        super().__init__(agent_id)
        self.commands = list(commands)

    def next_action(self, request: AgentRequest) -> AgentResponse:
        idx = request.turn - 1
        if idx < len(self.commands):
            return AgentResponse(action=self.commands[idx])
        return AgentResponse(action="STOP")


class LooperAgent(AgentHandle):
    """The same command, forever; never stops on its own."""

    def __init__(self, command: str, agent_id: str = "looper"):
        super().__init__(agent_id)
        self.command = command

    def next_action(self, request: AgentRequest) -> AgentResponse:
        return AgentResponse(action=self.command)


class IdlerAgent(AgentHandle):
    """Cycles harmless reads and a no-op config for many turns, then stops.

    Long enough to stagnate, but never four identical commands in a row and
    never ten consecutive reads.
    """

    def __init__(self, node: str, turns: int = 30, agent_id: str = "idler"):
        super().__init__(agent_id)
        self.turns = turns
        self.cycle = [
            f"{node}: show ip route",
            f"{node}: show interfaces",
            f"{node}: router rip",
        ]

    def next_action(self, request: AgentRequest) -> AgentResponse:
        if request.turn > self.turns:
            return AgentResponse(action="STOP")
        return AgentResponse(action=self.cycle[(request.turn - 1) % len(self.cycle)])


def _vandal_script(node: str, iface: str) -> list[str]:
    # Three destructive commands inside the last five config commands, all
    # accepted, none repeated consecutively.
    return [
        f"{node}: router ospf 1",
        f"{node}: passive-interface default",
        f"{node}: no passive-interface {iface}",
        f"{node}: router rip",
        f"{node}: no router rip",
    ]


def _fixation_script(nodes) -> list[str]:
    primary = nodes[0]
    secondary = nodes[1] if len(nodes) > 1 else nodes[0]
    return [
        f"{primary}: show ip route",
        f"{primary}: show interfaces",
        f"{primary}: show ospf neighbors",
        f"{primary}: show bgp summary",
        f"{primary}: show run",
        f"{secondary}: show ip route",
        f"{secondary}: show interfaces",
        f"{secondary}: show ospf neighbors",
        f"{secondary}: show bgp summary",
        f"{secondary}: show run",
    ]


class QuitterAgent(AgentHandle):
    """One garbage command, then an immediate low-score submission."""

    def __init__(self, node: str, agent_id: str = "quitter"):
        super().__init__(agent_id)
        self.node = node

    def next_action(self, request: AgentRequest) -> AgentResponse:
        if request.turn == 1:
            return AgentResponse(action=f"{self.node}: configure terminal magic")
        return AgentResponse(action="STOP")


class RandomAgent(AgentHandle):
    """Seeded grammar sampler: mostly valid reads and configs, a little
    garbage, then STOP after a fixed number of turns."""

    def __init__(self, task: TaskSpec, seed: int = 0, turns: int = 12,
                 agent_id: str = "random"):
        super().__init__(agent_id)
        self.rng = random.Random(seed)
        self.turns = turns
        self.nodes = list(task.node_names())
        self.ifaces = {n: [] for n in self.nodes}
        link_count = 0
        for cmd in task.topology:
            if cmd.verb == "add_link":
                link_count += 1
                for node, iface in cmd.endpoints:
                    self.ifaces[node].append(iface)
        self.targets = ["10.0.0.1", "192.168.1.1"]
        self.prefixes = ["10.0.0.0/24", "192.168.1.0/24"]
        for prop in task.intent:
            for key, value in prop.args:
                if key == "target":
                    self.targets.append(value)
                elif key == "prefix":
                    self.prefixes.append(value)

    def _random_addr(self) -> str:
        return (
            f"10.{self.rng.randint(0, 99)}."
            f"{self.rng.randint(0, 99)}.{self.rng.randint(1, 9)}"
        )

    def next_action(self, request: AgentRequest) -> AgentResponse:
        if request.turn > self.turns:
            return AgentResponse(action="STOP")
        rng = self.rng
        node = rng.choice(self.nodes)
        roll = rng.random()
        if roll < 0.08:
            return AgentResponse(action=rng.choice([
                f"{node}: configure terminal magic",
                f"{node} show ip route",
                "reload now",
            ]))
        if roll < 0.5:
            reads = [
                f"{node}: show ip route",
                f"{node}: show interfaces",
                f"{node}: show ospf neighbors",
                f"{node}: show bgp summary",
                f"{node}: show run",
                f"{node}: ping {rng.choice(self.targets)}",
            ]
            return AgentResponse(action=rng.choice(reads))
        choices = [
            f"{node}: router rip",
            f"{node}: router ospf 1",
            f"{node}: router bgp {rng.randint(64512, 64520)}",
            f"{node}: rip network {rng.choice(self.prefixes)}",
            f"{node}: ip route {rng.choice(self.prefixes)} via {rng.choice(self.targets)}",
            f"{node}: ospf network {rng.choice(self.prefixes)} area {rng.randint(0, 2)}",
            f"{node}: bgp network {rng.choice(self.prefixes)}",
            f"{node}: no router rip",
        ]
        if self.ifaces[node]:
            iface = rng.choice(self.ifaces[node])
            plen = rng.choice([24, 30])
            choices.append(f"{node}: interface {iface} ip {self._random_addr()}/{plen}")
            choices.append(f"{node}: no interface {iface} ip")
        return AgentResponse(action=rng.choice(choices))


def load_solution(name_or_path: str) -> list[str]:
    """Resolve a shipped solution name (data/solutions) or a JSON file path."""
    candidate = Path(name_or_path)
    if candidate.suffix == ".json" and candidate.exists():
        payload = json.loads(candidate.read_text(encoding="utf-8"))
    else:
        resource = resources.files("simnetbench").joinpath(
            f"data/solutions/{name_or_path}.json"
        )
        if not resource.is_file():
            raise UnknownAgent(f"no shipped solution named {name_or_path!r}")
        payload = json.loads(resource.read_text(encoding="utf-8"))
    if isinstance(payload, dict):
        return list(payload["commands"])
    return list(payload)


def _kv_params(params: str | None) -> dict[str, str]:
    out = {}
    if params:
        for part in params.split(","):
            if "=" in part:
                key, _, value = part.partition("=")
                out[key.strip()] = value.strip()
    return out


def builtin(name: str, params: str | None = None,
            task: TaskSpec | None = None) -> AgentHandle:
    """Construct a builtin agent; `task` supplies node/interface context."""
    if name not in BUILTIN_NAMES:
        raise UnknownAgent(f"unknown builtin agent {name!r}")
    nodes = list(task.node_names()) if task is not None else ["r1"]
    first = nodes[0]
    first_iface = "eth0"
    if task is not None:
        found = False
        for cmd in task.topology:
            if cmd.verb != "add_link" or found:
                continue
            for node, iface in sorted(cmd.endpoints):
                if node == first:
                    first_iface = iface
                    found = True
                    break

    if name == "replay":
        if params is None:
            raise UnknownAgent("replay needs a solution name, file path, or script")
        commands = load_solution(params)
        stem = Path(params).stem
        return ReplayAgent(commands, agent_id=f"replay-{stem}")
    if name == "looper":
        if params and params.startswith("cmd="):
            command = params[len("cmd="):]
        elif params:
            command = params
        else:
            command = f"{first}: show ip route"
        return LooperAgent(command)
    if name == "vandal":
        return ReplayAgent(_vandal_script(first, first_iface), agent_id="vandal")
    if name == "idler":
        kv = _kv_params(params)
        return IdlerAgent(first, turns=int(kv.get("turns", 30)))
    if name == "quitter":
        return QuitterAgent(first)
    if name == "random":
        kv = _kv_params(params)
        if task is None:
            raise UnknownAgent("random agent needs a task for its grammar pools")
        return RandomAgent(
            task,
            seed=int(kv.get("seed", 0)),
            turns=int(kv.get("turns", 12)),
            agent_id=f"random-{kv.get('seed', 0)}",
        )
    raise UnknownAgent(name)


def fixation_fixture(task: TaskSpec) -> AgentHandle:
    """Scripted agent that triggers diagnostic fixation and nothing else."""
    return ReplayAgent(_fixation_script(list(task.node_names())), agent_id="fixation")
