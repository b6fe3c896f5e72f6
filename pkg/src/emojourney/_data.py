"""Access to the bundled default configuration files."""

from importlib import resources


def read_default(name: str) -> str:
    """Return the contents of a bundled data file as text."""
    return (
        resources.files(__package__)
        .joinpath("data")
        .joinpath(name)
        .read_text(encoding="utf-8")
    )
