"""Named profiles: the extremal family and the fixtures shipped with the package."""

from __future__ import annotations

from importlib import resources

from .core import PreferenceProfile
from .errors import UnknownFixture
from .profile_io import parse_profile

FIXTURES = (
    "usm-maxprop-not-spc",
    "maxprop-not-maxrou",
    "usm-not-spc-not-maxprop",
    "no-common-last",
    "no-penultimate",
    "cyclic-second-prefs",
    "spc-not-maxprop",
    "two-stable-a",
    "two-stable-b",
)


def gen_extremal(n: int) -> PreferenceProfile:
    """Profile on which men-proposing DA makes n^2-n+1 proposals in n^2-2n+2 rounds.

    Men 1..n-1 cycle through women 1..n-1 starting from their own index and
    rank woman n last; man n ranks the women in index order; woman j ranks
    men j+1, ..., n, 1, ..., j.
    """
    if n < 2:
        raise ValueError("the extremal family starts at n=2")
    k = n - 1
    men = [tuple((i + t) % k for t in range(k)) + (k,) for i in range(k)]
    men.append(tuple(range(n)))
    women = [tuple((j + 1 + t) % n for t in range(n)) for j in range(n)]
    return PreferenceProfile(tuple(men), tuple(women))


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return resources.files("smlab.fixtures").joinpath(f"{name}.prof").read_text(encoding="utf-8")


def gen_fixture(name: str) -> PreferenceProfile:
    return parse_profile(fixture_text(name))
