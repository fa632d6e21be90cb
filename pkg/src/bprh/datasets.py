"""Bundled data.

``football.csv``
    42 American football games.  ``y1`` is the game time to the first points
    scored by kicking the ball between the goal posts, ``y2`` the game time to
    the first touchdown, both in decimal minutes divided by 100.  A touchdown
    followed by its conversion kick records a tie.  The pairs are the
    Csorgo-Welsh (1989) football data as transcribed from a secondary listing;
    the transcription could not be checked against the original publication,
    so the row order and individual values carry that caveat.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .simulate import CensoredSample

__all__ = ["football_path", "load_football"]


def football_path() -> Path:
    """Filesystem path of the bundled football CSV."""
    return Path(str(resources.files("bprh").joinpath("data", "football.csv")))


def load_football() -> CensoredSample:
    """The 42 football pairs as an uncensored sample."""
    path = football_path()
    if not path.exists():
        raise FileNotFoundError(
            f"football dataset missing at {path}; reinstall the package or pass --data with a CSV "
            "having columns y1,y2 (decimal minutes / 100)"
        )
    return CensoredSample.from_csv(path)
