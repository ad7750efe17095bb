"""Island-model genetic algorithm over bijective S-boxes.

Fitness is the nonlinearity score. Children come from one-point crossover
followed by a repair step that restores bijectivity; parents and children
are merged, deduplicated by SHA3-256 digest, and truncated (mu + lambda),
so the best fitness on every island never decreases.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptyAfterFilter
from .metrics import nonlinearity, nonlinearity_scores
from .sbox import SBox, canonical_digest

log = logging.getLogger(__name__)

HISTOGRAM_BINS = ("<=99", "100-102", "103-104", "105-106", ">=107")


@dataclass(frozen=True)
class Individual:
    sbox: SBox
    fitness: int
    digest: bytes

    @classmethod
    def of(cls, sbox: SBox, fitness: int | None = None) -> Individual:
        if fitness is None:
            fitness = nonlinearity(sbox)
        return cls(sbox, int(fitness), canonical_digest(sbox))


def _rank_key(ind: Individual):
    return (-ind.fitness, ind.digest)


@dataclass(frozen=True)
class GAConfig:
    islands: int = 4
    population_per_island: int = 100
    generations: int = 50
    migration_interval: int = 10
    migration_count: int = 2
    selection_range: tuple[int, int] = (100, 106)
    rng_seed: int = 0
    crossover_point: int = 128

    def __post_init__(self):
        for name in ("islands", "population_per_island", "migration_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.generations < 0 or self.migration_count < 0:
            raise ValueError("generations and migration_count must be non-negative")
        lo, hi = self.selection_range
        if lo > hi:
            raise ValueError(f"selection range {self.selection_range} is empty")
        if not 0 < self.crossover_point < 256:
            raise ValueError("crossover point must lie in 1..255")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


@dataclass
class Population:
    islands: list[list[Individual]]
    generation: int = 0

    @property
    def individuals(self) -> list[Individual]:
        """All islands merged, digest-deduplicated, best first."""
        seen = {}
        for island in self.islands:
            for ind in island:
                seen.setdefault(ind.digest, ind)
        return sorted(seen.values(), key=_rank_key)

    def __len__(self) -> int:
        return len(self.individuals)

    def best(self) -> int | None:
        inds = [i for island in self.islands for i in island]
        return max((i.fitness for i in inds), default=None)


def dedup(individuals: Iterable[Individual]) -> list[Individual]:
    seen = set()
    out = []
    for ind in individuals:
        if ind.digest not in seen:
            seen.add(ind.digest)
            out.append(ind)
    return out


def seed_population(candidates: Sequence[SBox], cfg: GAConfig) -> Population:
    """Keep candidates scoring inside the selection range, split round-robin."""
    if not candidates:
        raise EmptyAfterFilter("no candidate S-boxes supplied")
    lo, hi = cfg.selection_range
    scores = nonlinearity_scores(np.array([s.array for s in candidates]))
    kept = dedup(
        Individual.of(s, int(f)) for s, f in zip(candidates, scores) if lo <= f <= hi
    )
    if not kept:
        raise EmptyAfterFilter(
            f"none of {len(candidates)} candidates scores within {lo}..{hi}"
        )
    islands: list[list[Individual]] = [[] for _ in range(cfg.islands)]
    for i, ind in enumerate(kept):
        islands[i % cfg.islands].append(ind)
    return Population(islands)


def crossover(a: SBox, b: SBox, point: int = 128) -> tuple[bytes, bytes]:
    """One-point crossover; the children may repeat values."""
    if not 0 < point < 256:
        raise ValueError("crossover point must lie in 1..255")
    ta, tb = a.table if isinstance(a, SBox) else bytes(a), b.table if isinstance(b, SBox) else bytes(b)
    return ta[:point] + tb[point:], tb[:point] + ta[point:]


def repair(raw: Sequence[int]) -> SBox:
    """Restore bijectivity scanning left to right.

    A repeated value is replaced by the first single-bit flip of it (bit 0
    upward) not yet present; if all eight flips are taken, 1 is added to it
    (mod 256) until a free value is found.
    """
    values = list(raw)
    if len(values) != 256:
        raise ValueError(f"expected 256 values, got {len(values)}")
    seen = set()
    for i, v in enumerate(values):
        if v in seen:
            for bit in range(8):
                cand = v ^ (1 << bit)
                if cand not in seen:
                    break
            else:
                cand = (v + 1) % 256
                while cand in seen:
                    cand = (cand + 1) % 256
            values[i] = cand
            v = cand
        seen.add(v)
    return SBox(bytes(values))


def _tournament(island: list[Individual], rng: np.random.Generator) -> Individual:
    i, j = rng.integers(len(island), size=2)
    a, b = island[i], island[j]
    return a if _rank_key(a) <= _rank_key(b) else b


def _offspring(island: list[Individual], cfg: GAConfig, rng: np.random.Generator) -> list[Individual]:
    children = []
    while len(children) < cfg.population_per_island:
        pa, pb = _tournament(island, rng), _tournament(island, rng)
        for raw in crossover(pa.sbox, pb.sbox, cfg.crossover_point):
            children.append(repair(raw))
    children = children[: cfg.population_per_island]
    scores = nonlinearity_scores(np.array([c.array for c in children]))
    return [Individual.of(c, int(f)) for c, f in zip(children, scores)]


def _survivors(members: Iterable[Individual], capacity: int) -> list[Individual]:
    return sorted(dedup(members), key=_rank_key)[:capacity]


@dataclass
class GenerationLog:
    rows: list[tuple[int, int, int, float, int]] = field(default_factory=list)

    HEADER = ("generation", "island", "best", "mean", "population_size")

    def record(self, generation: int, island: int, members: list[Individual]) -> None:
        fits = [m.fitness for m in members]
        self.rows.append(
            (generation, island, max(fits), float(np.mean(fits)), len(members))
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.HEADER)
        for g, i, best, mean, size in self.rows:
            writer.writerow((g, i, best, f"{mean:.4f}", size))
        return buf.getvalue()


def evolve(
    pop: Population,
    cfg: GAConfig,
    on_generation: Callable[[Population], None] | None = None,
) -> tuple[Population, GenerationLog]:
    """Run ``cfg.generations`` generations on every island.

    Each island draws from its own generator spawned from ``cfg.rng_seed``;
    islands are processed in order, so a run is fully determined by the
    seed and the seed population. ``on_generation`` sees a snapshot after
    every generation, migration included.
    """
    islands = [list(island) for island in pop.islands]
    while len(islands) < cfg.islands:
        islands.append([])
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.rng_seed).spawn(len(islands))]
    glog = GenerationLog()
    for i, island in enumerate(islands):
        if island:
            glog.record(pop.generation, i, island)

    generation = pop.generation
    for step in range(1, cfg.generations + 1):
        generation = pop.generation + step
        for i, island in enumerate(islands):
            if not island:
                continue
            children = _offspring(island, cfg, rngs[i])
            islands[i] = _survivors(island + children, cfg.population_per_island)
        if cfg.migration_count and len(islands) > 1 and step % cfg.migration_interval == 0:
            emigrants = [island[: cfg.migration_count] for island in islands]
            for i, group in enumerate(emigrants):
                dest = (i + 1) % len(islands)
                islands[dest] = _survivors(islands[dest] + group, cfg.population_per_island)
        for i, island in enumerate(islands):
            if island:
                glog.record(generation, i, island)
        if on_generation is not None:
            on_generation(Population([list(isl) for isl in islands], generation))
        log.debug("generation %d best %s", generation, max(
            (isl[0].fitness for isl in islands if isl), default=None))
    return Population(islands, generation), glog


def nl_histogram(individuals: Iterable[Individual | SBox | int]) -> dict[str, int]:
    """Counts per nonlinearity-score band; the last band is open-ended."""
    bins = dict.fromkeys(HISTOGRAM_BINS, 0)
    for item in individuals:
        if isinstance(item, Individual):
            f = item.fitness
        elif isinstance(item, SBox):
            f = nonlinearity(item)
        else:
            f = int(item)
        if f <= 99:
            bins["<=99"] += 1
        elif f <= 102:
            bins["100-102"] += 1
        elif f <= 104:
            bins["103-104"] += 1
        elif f <= 106:
            bins["105-106"] += 1
        else:
            bins[">=107"] += 1
    return bins


def histogram_csv(histograms: dict[str, dict[str, int]]) -> str:
    """One row per labelled set, one column per band."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("set",) + HISTOGRAM_BINS)
    for name, bins in histograms.items():
        writer.writerow((name,) + tuple(bins[b] for b in HISTOGRAM_BINS))
    return buf.getvalue()
