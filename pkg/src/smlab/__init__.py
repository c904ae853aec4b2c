"""Deferred acceptance, unique-stable-matching conditions and profile-space census."""

from .conditions import (
    Condition,
    ConditionReport,
    FailedCondition,
    RegionLabel,
    build_second_pref_digraph,
    classify,
    is_max_prop,
    is_max_rou,
    is_ncc,
    is_spc,
)
from .core import AgentIndex, Matching, PreferenceProfile, ProfileOrdering, Side, prefers, relabel, validate_profile
from .da import DaOutcome, ProposalEvent, run_da, run_da_dual
from .generators import gen_extremal, gen_fixture
from .profile_io import parse_profile, render_profile
from .stability import enumerate_stable, find_blocking_pair, is_usm

__version__ = "0.1.0"
