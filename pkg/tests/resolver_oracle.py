"""Brute-force oracle for the capability resolver.

Independent of the production search: it enumerates raw assignment vectors
(every capability mapped to one provider or left out), keeps the feasible
minimal closures, and then picks the greedy optimum by iterative filtering
over that solution set.  Used by the resolver tests and the acceptance
suite.
"""

from __future__ import annotations

import itertools
import random

from sbxkit.catalogue import ModuleDescriptor, Requirement, ResourceEstimate
from sbxkit.semver import Range, Version

Solution = dict[str, tuple[str, str]]  # capability -> (name, version string)


def all_capabilities(modules: list[ModuleDescriptor]) -> list[str]:
    caps: set[str] = set()
    for module in modules:
        caps.update(module.provides)
        caps.update(r.capability for r in module.requires)
    return sorted(caps)


def enumerate_solutions(modules: list[ModuleDescriptor],
                        roots: list[Requirement]) -> list[Solution]:
    by_id = {m.catalogue_id(): m for m in modules}
    caps = all_capabilities(modules)
    options: list[list[ModuleDescriptor | None]] = []
    for cap in caps:
        providers: list[ModuleDescriptor | None] = [m for m in modules if cap in m.provides]
        providers.append(None)
        options.append(providers)

    root_ranges: dict[str, list[Range]] = {}
    for root in roots:
        root_ranges.setdefault(root.capability, []).append(root.range)

    solutions: dict[frozenset, Solution] = {}
    for combo in itertools.product(*options):
        choice = dict(zip(caps, combo))
        # closure from roots
        needed: set[str] = set()
        frontier = [r.capability for r in roots]
        ok = True
        while frontier:
            cap = frontier.pop()
            if cap in needed:
                continue
            module = choice.get(cap)
            if module is None:
                ok = False
                break
            needed.add(cap)
            frontier.extend(req.capability for req in module.requires)
        if not ok:
            continue
        # every requesting range must accept the chosen version
        for cap, ranges in root_ranges.items():
            if any(not rng.contains(choice[cap].version) for rng in ranges):
                ok = False
        if ok:
            for cap in needed:
                for req in choice[cap].requires:
                    if not req.range.contains(choice[req.capability].version):
                        ok = False
        if not ok or _cyclic(choice, needed):
            continue
        solution: Solution = {cap: (choice[cap].name, str(choice[cap].version))
                              for cap in needed}
        solutions[frozenset(solution.items())] = solution
    return list(solutions.values())


def _cyclic(choice: dict[str, ModuleDescriptor | None], needed: set[str]) -> bool:
    """A valid toolchain admits a dependency order; reject closures that don't."""
    edges = {cap: {req.capability for req in choice[cap].requires
                   if req.capability in needed and req.capability != cap}
             for cap in needed}
    remaining = {cap: set(deps) for cap, deps in edges.items()}
    while remaining:
        ready = [cap for cap, deps in remaining.items() if not deps]
        if not ready:
            return True
        for cap in ready:
            del remaining[cap]
        for deps in remaining.values():
            deps.difference_update(ready)
    return False


def greedy_optimum(modules: list[ModuleDescriptor], roots: list[Requirement],
                   solutions: list[Solution]) -> Solution | None:
    """Filter the solution set the way the stated policy orders choices:
    capabilities bound in lexicographic order as they become needed, highest
    version first, module name ascending on ties."""
    if not solutions:
        return None
    by_id = {m.catalogue_id(): m for m in modules}
    candidates = list(solutions)
    bound: dict[str, tuple[str, str]] = {}
    while True:
        needed = {r.capability for r in roots}
        for cap, (name, version) in bound.items():
            for req in by_id[f"{name}@{version}"].requires:
                needed.add(req.capability)
        open_caps = sorted(needed - set(bound))
        if not open_caps:
            break
        cap = open_caps[0]
        best = max((s[cap] for s in candidates),
                   key=lambda nv: (Version.parse(nv[1]).key(),
                                   tuple(-ord(c) for c in nv[0])))
        candidates = [s for s in candidates if s[cap] == best]
        bound[cap] = best
    assert len({frozenset(s.items()) for s in candidates}) == 1
    return candidates[0]


# --- scenario generation ------------------------------------------------------

VERSION_POOL = ["0.3.0", "1.0.0", "1.1.0", "1.2.0", "2.0.0", "2.0.3", "2.1.0", "3.0.0"]
RANGE_POOL = ["^1.0.0", "^2.0.0", "~1.1.0", "~2.0.0", "=1.2.0", ">=1.0.0", ">=2.0.3", "^0.3.0"]


def make_module(name: str, version: str, provides: list[str],
                requires: list[tuple[str, str]] = ()) -> ModuleDescriptor:
    return ModuleDescriptor(
        name=name,
        version=Version.parse(version),
        provides=tuple(provides),
        test_types=(),
        dimension="final_product",
        requires=tuple(Requirement(cap, Range.parse(rng)) for cap, rng in requires),
        resource_estimate=ResourceEstimate(),
        entrypoint="",
        checksum="0" * 64,
    )


def random_scenario(rng: random.Random) -> tuple[list[ModuleDescriptor], list[Requirement]]:
    cap_count = rng.randint(1, 3)
    caps = ["alpha", "beta", "gamma"][:cap_count]
    modules: list[ModuleDescriptor] = []
    for cap in caps:
        versions = rng.sample(VERSION_POOL, rng.randint(1, 4))
        for version in versions:
            requires = []
            for other in caps:
                if other != cap and rng.random() < 0.35:
                    requires.append((other, rng.choice(RANGE_POOL)))
            modules.append(make_module(cap, version, [cap], requires))
    if len(modules) > 4:
        modules = modules[:4]
    root_caps = rng.sample(caps, rng.randint(1, len(caps)))
    roots = [Requirement(cap, Range.parse(rng.choice(RANGE_POOL))) for cap in root_caps]
    return modules, roots
