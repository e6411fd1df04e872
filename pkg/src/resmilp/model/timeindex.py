"""Left-indexed time axis of an energy system."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta

_FREQ_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)?\s*(T|min|H|h|S|s|D|d)\s*$")
_UNIT_SECONDS = {"T": 60, "min": 60, "H": 3600, "h": 3600, "S": 1, "s": 1, "D": 86400, "d": 86400}


class NonPositiveSpan(ValueError):
    pass


class BadFrequency(ValueError):
    pass


def parse_freq(freq: str | timedelta) -> timedelta:
    """Parse a pandas-like frequency string such as ``"60T"`` or ``"1H"``."""
    if isinstance(freq, timedelta):
        step = freq
    else:
        match = _FREQ_RE.match(str(freq))
        if match is None:
            raise BadFrequency(f"cannot parse frequency {freq!r}")
        count = float(match.group(1)) if match.group(1) else 1.0
        step = timedelta(seconds=count * _UNIT_SECONDS[match.group(2)])
    if step <= timedelta(0):
        raise BadFrequency(f"frequency {freq!r} is not positive")
    return step


def to_datetime(value: str | datetime) -> datetime:
    if isinstance(value, datetime):
        return value
    try:
        return datetime.fromisoformat(str(value).strip())
    except ValueError as err:
        raise ValueError(f"not an ISO timestamp: {value!r}") from err


@dataclass(frozen=True)
class TimeIndex:
    """Boundary timestamps ``start, start+freq, ..., end``.

    Every timestamp except ``end`` labels the interval it begins. If the span
    is not a multiple of ``freq`` the last interval is shorter.
    """

    start: datetime
    end: datetime
    freq: str = "60T"

    def __post_init__(self):
        object.__setattr__(self, "start", to_datetime(self.start))
        object.__setattr__(self, "end", to_datetime(self.end))
        if not isinstance(self.freq, str):
            object.__setattr__(self, "freq", _format_freq(parse_freq(self.freq)))
        parse_freq(self.freq)
        if self.end <= self.start:
            raise NonPositiveSpan(f"end {self.end} is not after start {self.start}")

    @property
    def step(self) -> timedelta:
        return parse_freq(self.freq)

    @property
    def boundaries(self) -> tuple[datetime, ...]:
        stamps = []
        current = self.start
        while current < self.end:
            stamps.append(current)
            current = current + self.step
        stamps.append(self.end)
        return tuple(stamps)

    @property
    def intervals(self) -> tuple[tuple[datetime, timedelta], ...]:
        b = self.boundaries
        return tuple((b[i], b[i + 1] - b[i]) for i in range(len(b) - 1))

    @property
    def durations(self) -> tuple[float, ...]:
        """Interval lengths in hours."""
        return tuple(d.total_seconds() / 3600.0 for _, d in self.intervals)

    def __len__(self) -> int:
        return len(self.boundaries) - 1


def _format_freq(step: timedelta) -> str:
    minutes = step.total_seconds() / 60.0
    if minutes == int(minutes):
        return f"{int(minutes)}T"
    return f"{step.total_seconds():g}S"


def build_time_index(start, end, freq) -> TimeIndex:
    return TimeIndex(start=start, end=end, freq=freq)
