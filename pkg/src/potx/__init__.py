"""Perspectives, observers and transparency for human-in-the-loop system models."""

from .classify import (ABILITIES, ClassificationMap, ModelClass, Perspective, classify_all,
                       classify_model, classify_state, required_level)
from .dsl import Document, ParseError, parse, serialize
from .errors import PotxError
from .graph import (Cpt, Finding, Measure, Model, Observer, Physicality, Severity, State,
                    SystemGraph, resolve, validate_structure)
from .inference import brute_force_joint, infer
from .recipe import Gap, GapReport, ObserverSuggestion, analyze_gaps, suggest_observer
from .transparency import (ObserverViolation, OpacityMap, Rule, TransparencyRegion,
                           check_observer, opacity_map, transparent_region)


def load(text: str) -> SystemGraph:
    """Parse and resolve a ``.potx`` document in one step."""
    return resolve(parse(text))


__all__ = [
    "ABILITIES", "ClassificationMap", "Cpt", "Document", "Finding", "Gap", "GapReport",
    "Measure", "Model", "ModelClass", "Observer", "ObserverSuggestion", "ObserverViolation",
    "OpacityMap", "ParseError", "Perspective", "Physicality", "PotxError", "Rule", "Severity",
    "State", "SystemGraph", "TransparencyRegion", "analyze_gaps", "brute_force_joint",
    "check_observer", "classify_all", "classify_model", "classify_state", "infer", "load",
    "opacity_map", "parse", "required_level", "resolve", "serialize", "suggest_observer",
    "transparent_region", "validate_structure",
]

__version__ = "0.1.0"
