"""Observation extraction: (f_i, f_u, f_g) triples with a canonical frame."""
from .schema import (
    FieldSpec,
    GLOBAL_FIELDS,
    GLOBAL_WIDTH,
    IMAGE_SIZE,
    MAX_CREEPS_PER_SIDE,
    MAX_UNITS,
    N_IMAGE_CHANNELS,
    TYPE_REGIONS,
    UNIT_FIELDS,
    UNIT_WIDTH,
    feature_manifest,
    global_field,
    manifest_json,
    normalize_field,
    unit_field,
    unit_row_names,
)
from .extract import LegalMasks, Observation, extract_observation, to_world_command

__all__ = [
    "FieldSpec",
    "GLOBAL_FIELDS",
    "GLOBAL_WIDTH",
    "IMAGE_SIZE",
    "LegalMasks",
    "MAX_CREEPS_PER_SIDE",
    "MAX_UNITS",
    "N_IMAGE_CHANNELS",
    "Observation",
    "TYPE_REGIONS",
    "UNIT_FIELDS",
    "UNIT_WIDTH",
    "extract_observation",
    "feature_manifest",
    "global_field",
    "manifest_json",
    "normalize_field",
    "to_world_command",
    "unit_field",
    "unit_row_names",
]
