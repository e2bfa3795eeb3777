"""Shipped example scenarios.

Three variants of a concurrent code-review merge decision. A TestRunner
reports a pass, later finds a failure, and an Orchestrator proposes the
merge; the Committer's guard asks whether the visible test state refers
to the proposed candidate and shows a pass with no later visible failure.

* ``merge_review`` — the failure update is still in transit at the choice
  event, so the guard holds there.
* ``merge_review_failure_first`` — the failure is delivered before the
  proposal; the guard is false.
* ``merge_review_stale_candidate`` — the proposal names a newer candidate
  than the visible test report; the candidate equality fails.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

NAMES = (
    "merge_review",
    "merge_review_failure_first",
    "merge_review_stale_candidate",
)


def fixture_path(name: str) -> Path:
    """Filesystem path of a shipped scenario (without the .json suffix)."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; have {NAMES}")
    return Path(resources.files(__package__) / f"{name}.json")
