"""The simnet-v1 platform command language.

Every agent-facing command is a single line of the form ``<node>: <body>``.
The body either matches one of the finitely many configuration forms, one of
the read forms, or nothing (invalid). Parsing is pure and total: no command
string ever raises, it just classifies.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from enum import Enum

PLATFORM_ID = "simnet-v1"

# Bounds that keep every argument domain finite.
MAX_IFACE_INDEX = 99
MAX_OSPF_PID = 65535
MAX_AREA = 4294967295
MAX_ASN = 4294967295
MAX_CONFIG_PER_NODE = 256


class SyntaxClass(str, Enum):
    CONFIG_VALID = "config_valid"
    READ_VALID = "read_valid"
    INVALID = "invalid"


class CommandClass(str, Enum):
    CONSTRUCTIVE = "constructive"
    DESTRUCTIVE = "destructive"


@dataclass(frozen=True)
class ParsedCommand:
    """A validated command: target node, form identifier, typed args."""

    node: str
    form: str
    args: tuple = ()

    @property
    def is_read(self) -> bool:
        return self.form in READ_FORMS


def _parse_addr(tok: str) -> str | None:
    parts = tok.split(".")
    if len(parts) != 4:
        return None
    try:
        octets = [int(p) for p in parts]
    except ValueError:
        return None
    if any(p and (p[0] == "0" and len(p) > 1) for p in parts):
        return None
    if not all(0 <= o <= 255 for o in octets):
        return None
    return tok


def _parse_prefix(tok: str) -> str | None:
    if "/" not in tok:
        return None
    addr, _, plen = tok.partition("/")
    if _parse_addr(addr) is None or not plen.isdigit():
        return None
    if not 0 <= int(plen) <= 32:
        return None
    # Canonical form: host bits cleared, e.g. 10.0.1.5/24 -> 10.0.1.0/24.
    return str(ipaddress.ip_network(tok, strict=False))


def _parse_iface(tok: str) -> str | None:
    if not tok.startswith("eth"):
        return None
    idx = tok[3:]
    if not idx.isdigit() or int(idx) > MAX_IFACE_INDEX:
        return None
    return tok


def _parse_int(tok: str, lo: int, hi: int) -> int | None:
    if not tok.isdigit():
        return None
    val = int(tok)
    return val if lo <= val <= hi else None


def _parse_addr_plen(tok: str) -> tuple[str, int] | None:
    addr, _, plen = tok.partition("/")
    if _parse_addr(addr) is None or not plen.isdigit():
        return None
    if not 0 <= int(plen) <= 32:
        return None
    return addr, int(plen)


# Placeholders for form templates. Each maps one token to a typed value.
IF = ("if", _parse_iface)
ADDR = ("addr", _parse_addr)
PREFIX = ("prefix", _parse_prefix)
ADDRLEN = ("addrlen", _parse_addr_plen)
PID = ("pid", lambda t: _parse_int(t, 1, MAX_OSPF_PID))
AREA = ("area", lambda t: _parse_int(t, 0, MAX_AREA))
ASN = ("asn", lambda t: _parse_int(t, 1, MAX_ASN))
DIR = ("dir", lambda t: t if t in ("in", "out") else None)
ACTION = ("action", lambda t: t if t in ("permit", "deny") else None)

# form name -> token template. Literal strings match exactly; tuples are
# typed placeholders consuming one token.
CONFIG_FORMS: dict[str, tuple] = {
    "if_ip": ("interface", IF, "ip", ADDRLEN),
    "no_if_ip": ("no", "interface", IF, "ip"),
    "static_add": ("ip", "route", PREFIX, "via", ADDR),
    "static_del": ("no", "ip", "route", PREFIX),
    "rip_create": ("router", "rip"),
    "rip_del": ("no", "router", "rip"),
    "rip_network": ("rip", "network", PREFIX),
    "rip_network_del": ("no", "rip", "network", PREFIX),
    "ospf_create": ("router", "ospf", PID),
    "ospf_del": ("no", "router", "ospf", PID),
    "ospf_network": ("ospf", "network", PREFIX, "area", AREA),
    "ospf_network_del": ("no", "ospf", "network", PREFIX, "area", AREA),
    "if_ospf": ("interface", IF, "ospf", PID, "area", AREA),
    "no_if_ospf": ("no", "interface", IF, "ospf"),
    "passive_default": ("passive-interface", "default"),
    "no_passive": ("no", "passive-interface", IF),
    "area_range": ("area", AREA, "range", PREFIX),
    "area_range_del": ("no", "area", AREA, "range", PREFIX),
    "bgp_create": ("router", "bgp", ASN),
    "bgp_del": ("no", "router", "bgp", ASN),
    "bgp_neighbor": ("bgp", "neighbor", ADDR, "remote-as", ASN),
    "bgp_neighbor_del": ("no", "bgp", "neighbor", ADDR),
    "bgp_network": ("bgp", "network", PREFIX),
    "bgp_network_del": ("no", "bgp", "network", PREFIX),
    "bgp_filter": ("bgp", "filter", ADDR, DIR, ACTION, PREFIX),
    "bgp_filter_del": ("no", "bgp", "filter", ADDR, DIR, ACTION, PREFIX),
}

READ_FORMS: dict[str, tuple] = {
    "show_interfaces": ("show", "interfaces"),
    "show_ip_route": ("show", "ip", "route"),
    "show_ospf_neighbors": ("show", "ospf", "neighbors"),
    "show_bgp_summary": ("show", "bgp", "summary"),
    "show_run": ("show", "run"),
    "ping": ("ping", ADDR),
}


def classify_form(form: str) -> CommandClass:
    """Destructive iff the rendered command starts with `no` or resets
    all interfaces to passive; everything else builds state."""
    template = CONFIG_FORMS[form]
    if template[0] == "no" or form == "passive_default":
        return CommandClass.DESTRUCTIVE
    return CommandClass.CONSTRUCTIVE


def _match_template(tokens: list[str], template: tuple) -> tuple | None:
    if len(tokens) != len(template):
        return None
    args = []
    for tok, slot in zip(tokens, template):
        if isinstance(slot, str):
            if tok != slot:
                return None
        else:
            _, convert = slot
            val = convert(tok)
            if val is None:
                return None
            args.append(val)
    return tuple(args)


@dataclass(frozen=True)
class PlatformLanguage:
    """The finite command language for one provisioned topology.

    Node names are part of the argument domain, so the language is built
    per task (or per network state) from the known node set.
    """

    nodes: frozenset[str]
    platform_id: str = PLATFORM_ID
    n_max: int = MAX_CONFIG_PER_NODE

    @classmethod
    def for_nodes(cls, nodes) -> "PlatformLanguage":
        return cls(nodes=frozenset(nodes))

    def split_node(self, cmd: str) -> tuple[str, str] | None:
        head, sep, body = cmd.partition(":")
        if not sep:
            return None
        node = head.strip()
        if node not in self.nodes:
            return None
        return node, body.strip()

    def parse(self, cmd: str) -> ParsedCommand | None:
        """Parse into a typed command, or None when not in the language."""
        if not isinstance(cmd, str):
            return None
        split = self.split_node(cmd)
        if split is None:
            return None
        node, body = split
        tokens = body.split()
        if not tokens:
            return None
        for form, template in CONFIG_FORMS.items():
            args = _match_template(tokens, template)
            if args is not None:
                return ParsedCommand(node=node, form=form, args=args)
        for form, template in READ_FORMS.items():
            args = _match_template(tokens, template)
            if args is not None:
                return ParsedCommand(node=node, form=form, args=args)
        return None

    def validate_syntax(self, cmd: str) -> SyntaxClass:
        parsed = self.parse(cmd)
        if parsed is None:
            return SyntaxClass.INVALID
        if parsed.is_read:
            return SyntaxClass.READ_VALID
        return SyntaxClass.CONFIG_VALID

    def classify(self, cmd: str) -> CommandClass | None:
        """Constructive/destructive class of a config command, else None."""
        parsed = self.parse(cmd)
        if parsed is None or parsed.is_read:
            return None
        return classify_form(parsed.form)

    def command_forms(self) -> list[str]:
        """Human-readable listing of every form (finite by construction)."""
        rendered = []
        for form, template in list(CONFIG_FORMS.items()) + list(READ_FORMS.items()):
            parts = []
            for slot in template:
                parts.append(slot if isinstance(slot, str) else f"<{slot[0]}>")
            rendered.append(" ".join(parts))
        return rendered


def validate_syntax(cmd: str, platform: PlatformLanguage) -> SyntaxClass:
    """Module-level convenience wrapper around PlatformLanguage."""
    return platform.validate_syntax(cmd)
