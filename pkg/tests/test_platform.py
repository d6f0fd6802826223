from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from simnetbench.platform import (
    CONFIG_FORMS,
    CommandClass,
    PlatformLanguage,
    SyntaxClass,
    classify_form,
    validate_syntax,
)

LANG = PlatformLanguage.for_nodes(["r1", "r2"])


@pytest.mark.parametrize(
    "cmd,expected",
    [
        ("r1: router ospf 1", SyntaxClass.CONFIG_VALID),
        ("r1: show ip route", SyntaxClass.READ_VALID),
        ("r1: configure terminal magic", SyntaxClass.INVALID),
        ("r1: interface eth0 ip 10.0.1.1/24", SyntaxClass.CONFIG_VALID),
        ("r1: no interface eth0 ip", SyntaxClass.CONFIG_VALID),
        ("r1: ip route 10.0.0.0/24 via 10.0.1.2", SyntaxClass.CONFIG_VALID),
        ("r1: bgp filter 10.0.0.1 in deny 10.9.0.0/24", SyntaxClass.CONFIG_VALID),
        ("r1: ping 10.0.0.1", SyntaxClass.READ_VALID),
        ("r9: router rip", SyntaxClass.INVALID),  # node outside the domain
        ("router rip", SyntaxClass.INVALID),  # missing node prefix
        ("r1: interface eth0 ip 10.0.1.1", SyntaxClass.INVALID),  # missing length
        ("r1: interface eth0 ip 10.0.1.256/24", SyntaxClass.INVALID),
        ("r1: ip route 10.0.0.0/33 via 10.0.1.2", SyntaxClass.INVALID),
        ("r1: ospf network 10.0.0.0/24 area 0", SyntaxClass.CONFIG_VALID),
        ("r1: area 1 range 10.1.0.0/16", SyntaxClass.CONFIG_VALID),
        ("", SyntaxClass.INVALID),
        ("STOP", SyntaxClass.INVALID),
    ],
)
def test_validate_syntax_examples(cmd, expected):
    assert validate_syntax(cmd, LANG) is expected


def test_prefix_canonicalized_on_parse():
    parsed = LANG.parse("r1: ip route 10.0.1.5/24 via 10.0.1.2")
    assert parsed.args[0] == "10.0.1.0/24"


def test_whitespace_tolerant():
    assert LANG.validate_syntax("r1:   router   rip") is SyntaxClass.CONFIG_VALID


def test_classification_rule():
    for form in CONFIG_FORMS:
        rendered_starts_no = CONFIG_FORMS[form][0] == "no"
        expected = (
            CommandClass.DESTRUCTIVE
            if rendered_starts_no or form == "passive_default"
            else CommandClass.CONSTRUCTIVE
        )
        assert classify_form(form) is expected
    assert LANG.classify("r1: passive-interface default") is CommandClass.DESTRUCTIVE
    assert LANG.classify("r1: no passive-interface eth0") is CommandClass.DESTRUCTIVE
    assert LANG.classify("r1: router rip") is CommandClass.CONSTRUCTIVE
    assert LANG.classify("r1: show ip route") is None


def test_grammar_is_finite_and_enumerable():
    forms = LANG.command_forms()
    assert len(forms) == len(CONFIG_FORMS) + 6
    assert len(set(forms)) == len(forms)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=60))
def test_syntax_partition_is_total_and_exclusive(cmd):
    result = validate_syntax(cmd, LANG)
    assert result in (SyntaxClass.CONFIG_VALID, SyntaxClass.READ_VALID, SyntaxClass.INVALID)
    parsed = LANG.parse(cmd)
    if result is SyntaxClass.CONFIG_VALID:
        assert parsed is not None and not parsed.is_read
    elif result is SyntaxClass.READ_VALID:
        assert parsed is not None and parsed.is_read
    else:
        assert parsed is None


def test_determinism_of_validation():
    samples = ["r1: router rip", "r1: show run", "garbage", "r2: ping 1.2.3.4"]
    first = [validate_syntax(s, LANG) for s in samples]
    second = [validate_syntax(s, LANG) for s in samples]
    assert first == second
