"""Genetic linkage map construction.

Thin layer over the compiled ``_linkmap`` module. Everything returns new
objects; a ``Cross`` is never changed in place.
"""

from ._linkmap import (
    ConfigError,
    Cross,
    DataError,
    LinkmapError,
    ParseError,
    PopulationType,
    break_groups,
    cluster,
    combine,
    construct,
    fix_clones,
    gen_clones,
    hoeffding_delta,
    map_forward,
    map_inverse,
    merge,
    profile_genotypes,
    pull,
    push,
    quick_est,
    ril_expected_mismatch,
    ril_invert,
    seg_distortion,
    simulate,
    subset,
    threshold_cm,
    threshold_profile,
    two_point_lod,
)

__version__ = "0.3.0"

ALLELE_CODES = {"A": 0, "B": 1, "X": 2, "U": 3}


def load(path, pop="DH"):
    """Read a marker TSV (unconstructed, grouped or constructed)."""
    return Cross.load(str(path), pop)


def save(cross, path):
    """Write the map TSV plus a sidecar per non-empty ledger."""
    cross.save(str(path))


def map_lengths(cross):
    """Group name -> length in cM."""
    return {g["name"]: (g["positions"][-1] if g["positions"] else 0.0) for g in cross.groups}


__all__ = [name for name in dir() if not name.startswith("_")]
