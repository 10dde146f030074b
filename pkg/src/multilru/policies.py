"""LRU inventories and the three spatial cache policies.

single-LRU consults only the closest station. multi-LRU-One acts on one
cache per request: the closest holder on a hit, the closest covering
station on a miss. multi-LRU-All touches every covering holder on a hit
and inserts into every covering station on a miss. A request covered by
no station touches nothing.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional

from .coverage import CoverageSet


class LruCache:
    """Capacity-K recency list; MRU at the front, evictions take the LRU."""

    __slots__ = ("capacity", "_items")

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = capacity
        self._items = OrderedDict()  # insertion end = MRU

    def __len__(self):
        return len(self._items)

    def __contains__(self, content_id):
        return content_id in self._items

    def inventory(self) -> list:
        """Content ids from MRU to LRU position."""
        return list(reversed(self._items))

    def lookup(self, content_id) -> bool:
        return content_id in self._items

    def touch(self, content_id) -> None:
        if content_id not in self._items:
            raise KeyError(f"touch of absent content {content_id!r}")
        self._items.move_to_end(content_id)

    def insert(self, content_id) -> None:
        if content_id in self._items:
            raise ValueError(f"insert of already present content {content_id!r}")
        self._items[content_id] = None
        if len(self._items) > self.capacity:
            self._items.popitem(last=False)


def lru_lookup(cache: LruCache, content_id) -> bool:
    return cache.lookup(content_id)


def lru_touch(cache: LruCache, content_id) -> None:
    cache.touch(content_id)


def lru_insert(cache: LruCache, content_id) -> None:
    cache.insert(content_id)


@dataclass
class PolicyOutcome:
    hit: bool
    served_by: Optional[int] = None
    inserted_into: list = field(default_factory=list)
    m: int = 0


def single_lru(request, coverage: CoverageSet, caches: List[LruCache]) -> PolicyOutcome:
    ids = coverage.station_ids
    if not ids:
        return PolicyOutcome(hit=False, m=0)
    closest = ids[0]
    cache = caches[closest]
    cid = request.content_id
    if cache.lookup(cid):
        cache.touch(cid)
        return PolicyOutcome(hit=True, served_by=closest, m=len(ids))
    cache.insert(cid)
    return PolicyOutcome(hit=False, inserted_into=[closest], m=len(ids))


def multi_lru_one(request, coverage: CoverageSet, caches: List[LruCache]) -> PolicyOutcome:
    ids = coverage.station_ids
    if not ids:
        return PolicyOutcome(hit=False, m=0)
    cid = request.content_id
    # ids come sorted by distance, so the first holder is the closest one
    for sid in ids:
        if caches[sid].lookup(cid):
            caches[sid].touch(cid)
            return PolicyOutcome(hit=True, served_by=sid, m=len(ids))
    caches[ids[0]].insert(cid)
    return PolicyOutcome(hit=False, inserted_into=[ids[0]], m=len(ids))


def multi_lru_all(request, coverage: CoverageSet, caches: List[LruCache]) -> PolicyOutcome:
    ids = coverage.station_ids
    if not ids:
        return PolicyOutcome(hit=False, m=0)
    cid = request.content_id
    holders = [sid for sid in ids if caches[sid].lookup(cid)]
    if holders:
        for sid in holders:
            caches[sid].touch(cid)
        return PolicyOutcome(hit=True, served_by=holders[0], m=len(ids))
    for sid in ids:
        caches[sid].insert(cid)
    return PolicyOutcome(hit=False, inserted_into=list(ids), m=len(ids))


POLICIES = {
    "single-lru": single_lru,
    "multi-lru-one": multi_lru_one,
    "multi-lru-all": multi_lru_all,
}
