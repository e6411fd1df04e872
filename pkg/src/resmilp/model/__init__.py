"""Declarative description of a residential energy system."""

from . import carriers, demands, technologies
from .system import (
    DuplicateCarrier,
    DuplicateComponent,
    DuplicateDemandName,
    DuplicateLocation,
    EnergySystem,
    Link,
    Location,
    SpecError,
    ValidationIssue,
    ValidationReport,
    validate,
)
from .timeindex import BadFrequency, NonPositiveSpan, TimeIndex, build_time_index

__all__ = [
    "BadFrequency",
    "DuplicateCarrier",
    "DuplicateComponent",
    "DuplicateDemandName",
    "DuplicateLocation",
    "EnergySystem",
    "Link",
    "Location",
    "NonPositiveSpan",
    "SpecError",
    "TimeIndex",
    "ValidationIssue",
    "ValidationReport",
    "build_time_index",
    "carriers",
    "demands",
    "technologies",
    "validate",
]
