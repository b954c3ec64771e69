"""Shared test systems and cached pipeline results."""

from functools import lru_cache

from nilreturn import SystemSpec, normalize, return_map

G_CHOICES = {"1": (1.0,), "z": (0.0, 1.0), "1+z": (1.0, 1.0)}

BATTERY = [
    (k, l, gname)
    for k in (1, 2, 3)
    for l in range(1, 5)
    if k <= l
    for gname in G_CHOICES
]


def battery_id(case):
    k, l, gname = case
    return f"k{k}-l{l}-g{gname}"


def spec_of(case) -> SystemSpec:
    k, l, gname = case
    return SystemSpec((1.0,), G_CHOICES[gname], k, l)


@lru_cache(maxsize=None)
def cached_return_map(case, order=12):
    return return_map(spec_of(case), order)


@lru_cache(maxsize=None)
def cached_normalize(case):
    return normalize(spec_of(case))
