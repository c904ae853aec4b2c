"""Plain-text profile files.

Format: ``#`` starts a comment, blank lines are ignored.  The first
remaining line holds n; the next n lines are the men's rows and the n after
that the women's rows, each n whitespace-separated 1-based indices, most
preferred first.
"""

from __future__ import annotations

from pathlib import Path

from .core import PreferenceProfile
from .errors import ParseError, ProfileError


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_profile(text: str) -> PreferenceProfile:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty profile")
    lineno, first = lines[0]
    try:
        n = int(first)
    except ValueError:
        raise ParseError(lineno, f"expected n, got {first!r}") from None
    if n < 1:
        raise ParseError(lineno, "n must be positive")
    if len(lines) != 2 * n + 1:
        last = lines[-1][0]
        raise ParseError(last, f"expected {2 * n} preference rows for n={n}, found {len(lines) - 1}")

    rows = []
    for lineno, line in lines[1:]:
        try:
            values = [int(tok) - 1 for tok in line.split()]
        except ValueError:
            raise ParseError(lineno, f"non-integer entry in {line!r}") from None
        if len(values) != n:
            raise ParseError(lineno, f"expected {n} entries, got {len(values)}")
        rows.append((lineno, values))

    try:
        return PreferenceProfile(tuple(tuple(v) for _, v in rows[:n]), tuple(tuple(v) for _, v in rows[n:]))
    except ProfileError as exc:
        side_offset = 0 if exc.side == "men" else n
        line = rows[side_offset + exc.row][0] if exc.row is not None else lines[0][0]
        raise ParseError(line, str(exc)) from exc


def render_profile(profile: PreferenceProfile, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"# {c}" if c else "#" for c in comment.splitlines())
    out.append(str(profile.n))
    out.append("# men")
    out.extend(" ".join(str(w + 1) for w in row) for row in profile.men)
    out.append("# women")
    out.extend(" ".join(str(m + 1) for m in row) for row in profile.women)
    return "\n".join(out) + "\n"


def read_profile(path: str | Path) -> PreferenceProfile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))


def write_profile(path: str | Path, profile: PreferenceProfile, comment: str | None = None) -> None:
    Path(path).write_text(render_profile(profile, comment), encoding="utf-8")
