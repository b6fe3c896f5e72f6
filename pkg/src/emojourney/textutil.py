"""Shared word tokenization for the lexicon scorer and the hashing encoder."""

import re

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, keeping word-internal apostrophes."""
    return _TOKEN_RE.findall(text.lower())
