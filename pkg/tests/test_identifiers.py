import random
import string

import pytest

from lyphkit.identifiers import Identifier, IdentifierError, parse_identifier, render_ref


def test_plain_local():
    ident = parse_identifier("lt-soma")
    assert ident.local == "lt-soma"
    assert ident.prefix == ""
    assert ident.render() == "lt-soma"


def test_prefixed():
    ident = parse_identifier("wbkg:K_77")
    assert ident.prefix == "wbkg"
    assert ident.local == "K_77"
    assert ident.render() == "wbkg:K_77"


@pytest.mark.parametrize("bad", ["", ":", "a:", ":b", "a b", "p:a b", "p:q:r", "bad prefix:x", "p!x:y"])
def test_malformed(bad):
    with pytest.raises(IdentifierError):
        parse_identifier(bad)


def test_error_carries_position():
    with pytest.raises(IdentifierError) as err:
        parse_identifier("pre:lo cal")
    assert err.value.position == 6
    assert "pre:lo cal" in str(err.value)


def test_second_separator_position():
    with pytest.raises(IdentifierError) as err:
        parse_identifier("a:b:c")
    assert err.value.position == 3


def test_round_trip_randomized():
    rng = random.Random(0)
    prefix_chars = string.ascii_letters + string.digits + "_-"
    local_chars = string.ascii_letters + string.digits + "_-./#"
    for _ in range(500):
        local = "".join(rng.choice(local_chars) for _ in range(rng.randint(1, 12)))
        if rng.random() < 0.5:
            prefix = "".join(rng.choice(prefix_chars) for _ in range(rng.randint(1, 6)))
            ident = Identifier(local=local, prefix=prefix)
        else:
            ident = Identifier(local=local)
        assert parse_identifier(ident.render()) == ident


def test_render_ref_hides_home_namespace():
    assert render_ref("n1", "demo", "demo") == "n1"
    assert render_ref("n1", "", "demo") == "n1"
    assert render_ref("n1", "other", "demo") == "other:n1"
