"""Namespaced identifiers.

Every resource lives in a namespace; references written as "prefix:local"
point into another namespace, plain "local" tokens stay in the current one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

PREFIX_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class IdentifierError(ValueError):
    """Malformed identifier; carries the offending text and position."""

    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"bad identifier {text!r} at position {position}: {reason}")
        self.text = text
        self.position = position
        self.reason = reason


@dataclass(frozen=True)
class Identifier:
    """A reference token: optional namespace prefix plus a local name."""

    local: str
    prefix: str = ""

    def render(self) -> str:
        if self.prefix:
            return f"{self.prefix}:{self.local}"
        return self.local

    def __str__(self) -> str:
        return self.render()


def parse_identifier(text: str) -> Identifier:
    """Split "prefix:local" into parts, validating both.

    The prefix is restricted to [A-Za-z0-9_-]; the local token may not be
    empty, contain whitespace, or contain a second ":" separator.
    """
    if not isinstance(text, str):
        raise IdentifierError(str(text), 0, "not a string")
    if not text:
        raise IdentifierError(text, 0, "empty")
    prefix = ""
    local = text
    if ":" in text:
        prefix, local = text.split(":", 1)
        if not prefix or not PREFIX_RE.match(prefix):
            raise IdentifierError(text, 0, "invalid namespace prefix")
        extra = local.find(":")
        if extra >= 0:
            raise IdentifierError(text, len(prefix) + 1 + extra, "more than one ':' separator")
    if not local:
        raise IdentifierError(text, len(prefix) + 1 if prefix else 0, "empty local part")
    ws = re.search(r"\s", local)
    if ws:
        raise IdentifierError(text, (len(prefix) + 1 if prefix else 0) + ws.start(), "whitespace in local part")
    return Identifier(local=local, prefix=prefix)


def is_valid_identifier(text: str) -> bool:
    try:
        parse_identifier(text)
        return True
    except IdentifierError:
        return False


def render_ref(local: str, namespace: str, home: str) -> str:
    """Render a reference to `local` in `namespace` as seen from `home`."""
    if namespace and namespace != home:
        return f"{namespace}:{local}"
    return local
