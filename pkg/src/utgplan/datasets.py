"""Bundled example graphs."""

from __future__ import annotations

from importlib import resources

from utgplan.utg import Utg, load_utg


def calendar_path() -> str:
    return str(resources.files("utgplan") / "data" / "calendar.json")


def calendar_utg() -> Utg:
    """Simple Calendar Pro: 12 activities, 13 transitions."""
    return load_utg((resources.files("utgplan") / "data" / "calendar.json").read_text("utf-8"))
