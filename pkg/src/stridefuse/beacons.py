"""Ranked match-list ingestion and the location consistency vote.

A match list is what the place-recognition side hands over per query: up
to 25 (beacon id, similarity) pairs, best first. Rather than trusting the
single best match, the vote clusters the candidate locations and returns
the location that appears most often, which is robust to a confident but
wrong top hit among visually similar places.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Union

from .sensors import BeaconDatabase, Position2D, ValidationError

TOP_K = 25

QueryKey = Union[int, float, str]


class MatchCandidate(NamedTuple):
    beacon_id: str
    similarity: float


@dataclass(frozen=True)
class MatchList:
    """Candidates for one query, similarity non-increasing, length <= 25.

    Equal similarities are ordered by beacon id so every downstream
    decision is independent of the producer's ordering.
    """

    query_key: QueryKey
    candidates: tuple[MatchCandidate, ...]

    @staticmethod
    def from_candidates(query_key: QueryKey, candidates) -> "MatchList":
        ordered = sorted(candidates, key=lambda c: (-c.similarity, c.beacon_id))
        return MatchList(query_key=query_key, candidates=tuple(ordered[:TOP_K]))


class VoteResult(NamedTuple):
    position: Position2D
    support: int
    beacon_id: str


def load_matches(path: str | Path, db: BeaconDatabase) -> dict[QueryKey, MatchList]:
    """Load match JSONL: one ``{"query": key, "matches": [...]}`` per line.

    Lists are truncated to 25 and re-sorted by similarity descending.
    A candidate referencing a beacon id absent from ``db`` raises a
    :class:`ValidationError` naming the offending query.
    """
    path = Path(path)
    out: dict[QueryKey, MatchList] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "query" not in obj or "matches" not in obj:
                raise ValidationError(
                    f"{path}:{lineno}: each line needs 'query' and 'matches' fields"
                )
            key = obj["query"]
            candidates = []
            for entry in obj["matches"]:
                if not isinstance(entry, dict) or "beacon" not in entry or "sim" not in entry:
                    raise ValidationError(
                        f"{path}:{lineno}: query {key!r}: match entries need 'beacon' and 'sim'"
                    )
                bid = str(entry["beacon"])
                sim = float(entry["sim"])
                if not math.isfinite(sim):
                    raise ValidationError(
                        f"{path}:{lineno}: query {key!r}: non-finite similarity for {bid!r}"
                    )
                if bid not in db:
                    raise ValidationError(
                        f"{path}:{lineno}: query {key!r}: unknown beacon id {bid!r}"
                    )
                candidates.append(MatchCandidate(bid, sim))
            if key in out:
                raise ValidationError(f"{path}:{lineno}: duplicate query key {key!r}")
            out[key] = MatchList.from_candidates(key, candidates)
    return out


def write_matches(matches: dict[QueryKey, MatchList], path: str | Path) -> None:
    """Write the match JSONL schema (inverse of :func:`load_matches`)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for key, mlist in matches.items():
            obj = {
                "query": key,
                "matches": [
                    {"beacon": c.beacon_id, "sim": c.similarity} for c in mlist.candidates
                ],
            }
            fh.write(json.dumps(obj) + "\n")


def consistency_vote(
    match_list: MatchList, db: BeaconDatabase, bin_radius: float
) -> VoteResult:
    """Pick the candidate location that appears most often in the list.

    Candidates are scanned best-first and greedily clustered: each joins
    the first cluster whose seed position lies within ``bin_radius``, else
    seeds a new cluster. The most-populated cluster wins; ties go to the
    cluster seeded earliest in scan order (i.e. the one holding the
    highest-similarity candidate).
    """
    if not match_list.candidates:
        raise ValueError("cannot vote on an empty match list")
    if bin_radius < 0:
        raise ValueError(f"bin_radius must be >= 0, got {bin_radius}")

    seeds: list[MatchCandidate] = []
    seed_pos: list[Position2D] = []
    support: list[int] = []
    for cand in match_list.candidates:
        if cand.beacon_id not in db:
            raise ValidationError(f"unknown beacon id {cand.beacon_id!r} in match list")
        pos = db[cand.beacon_id].position
        for i, sp in enumerate(seed_pos):
            if sp.distance_to(pos) <= bin_radius:
                support[i] += 1
                break
        else:
            seeds.append(cand)
            seed_pos.append(pos)
            support.append(1)

    best = 0
    for i in range(1, len(seeds)):
        if support[i] > support[best]:
            best = i
    return VoteResult(position=seed_pos[best], support=support[best], beacon_id=seeds[best].beacon_id)
