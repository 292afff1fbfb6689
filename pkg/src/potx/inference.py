"""Discrete Bayesian-network queries restricted to transparent regions.

Every state with a declared domain is a categorical variable.  Its factor is
the :class:`~potx.graph.Cpt` of the model producing it, conditioned on that
model's domained inputs, or a prior declared on the state itself when no model
produces it.  :func:`infer` eliminates variables exactly; :func:`brute_force_joint`
enumerates the full joint and serves as the test oracle.
"""

from __future__ import annotations

import graphlib
import math
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .errors import (CyclicModel, MissingCpt, OpaqueQuery, TooLarge,
                     UnknownValue, ZeroProbabilityEvidence)
from .graph import Cpt, Observer, SystemGraph
from .transparency import opacity_map

__all__ = ["Cpt", "Factor", "infer", "brute_force_joint", "network_order",
           "MAX_ORACLE_STATES", "MAX_ORACLE_DOMAIN"]

Distribution = dict  # value -> probability, in domain order
Evidence = Mapping[str, str]

MAX_ORACLE_STATES = 20
MAX_ORACLE_DOMAIN = 4
MAX_ORACLE_JOINT = 1 << 22


class Factor:
    """Table over named variables; axis ``i`` indexes ``domain(vars[i])``."""

    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple[str, ...], table: np.ndarray):
        self.vars = tuple(vars)
        self.table = table

    def _expand(self, order: tuple[str, ...]) -> np.ndarray:
        perm = [self.vars.index(v) for v in order if v in self.vars]
        shape = [self.table.shape[self.vars.index(v)] if v in self.vars else 1 for v in order]
        return np.transpose(self.table, perm).reshape(shape)

    def __mul__(self, other: "Factor") -> "Factor":
        order = self.vars + tuple(v for v in other.vars if v not in self.vars)
        return Factor(order, self._expand(order) * other._expand(order))

    def sum_out(self, var: str) -> "Factor":
        axis = self.vars.index(var)
        return Factor(self.vars[:axis] + self.vars[axis + 1:], self.table.sum(axis=axis))

    def reduce(self, var: str, index: int) -> "Factor":
        axis = self.vars.index(var)
        return Factor(self.vars[:axis] + self.vars[axis + 1:], np.take(self.table, index, axis=axis))


def _domain(graph: SystemGraph, state: str) -> tuple[str, ...]:
    if state not in graph.states:
        raise UnknownValue(f"'{state}' is not a state")
    domain = graph.states[state].domain
    if not domain:
        raise UnknownValue(f"state '{state}' has no domain")
    return domain


def _check_evidence(graph: SystemGraph, evidence: Evidence) -> None:
    for state, value in evidence.items():
        if value not in _domain(graph, state):
            raise UnknownValue(f"'{value}' is not in the domain of '{state}'")


def _cpt(graph: SystemGraph, state: str) -> Cpt:
    try:
        return graph.cpts[state]
    except KeyError:
        raise MissingCpt(state) from None


def _ancestral(graph: SystemGraph, roots: Iterable[str]) -> set[str]:
    found, stack = set(), list(roots)
    while stack:
        s = stack.pop()
        if s in found:
            continue
        found.add(s)
        stack.extend(_cpt(graph, s).parents)
    return found


def network_order(graph: SystemGraph, variables: Iterable[str]) -> list[str]:
    """Children-first order of ``variables`` (reverse topological, ties alphabetical)."""
    variables = set(variables)
    sorter = graphlib.TopologicalSorter()
    for v in variables:
        # a parent waits for its children
        sorter.add(v)
        for p in _cpt(graph, v).parents:
            if p in variables:
                sorter.add(p, v)
    try:
        sorter.prepare()
    except graphlib.CycleError as exc:
        raise CyclicModel(exc.args[1]) from None
    order = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        order.extend(ready)
        sorter.done(*ready)
    return order


def _factor(graph: SystemGraph, state: str) -> Factor:
    cpt = _cpt(graph, state)
    domains = [graph.states[p].domain for p in cpt.parents]
    out = graph.states[state].domain
    table = np.zeros([len(d) for d in domains] + [len(out)])
    for idx in product(*(range(len(d)) for d in domains)):
        row = cpt.rows[tuple(d[i] for d, i in zip(domains, idx))]
        table[idx] = [row.get(v, 0.0) for v in out]
    return Factor(cpt.parents + (state,), table)


def _normalize(graph: SystemGraph, query: str, weights) -> Distribution:
    total = math.fsum(weights)
    if total <= 0.0:
        raise ZeroProbabilityEvidence()
    return {v: w / total for v, w in zip(graph.states[query].domain, weights)}


def infer(graph: SystemGraph, deployed: Iterable[Observer | str], evidence: Evidence,
          query: str) -> Distribution:
    """Posterior of ``query`` given ``evidence`` by variable elimination.

    The query, every evidence state, every state the computation touches and
    every model carrying one of their tables must be transparent under the
    deployed observers; otherwise :class:`OpaqueQuery` names the first
    offender (query, then evidence, then the rest alphabetically).
    """
    evidence = dict(evidence)
    opacity = opacity_map(graph, deployed)
    if query not in graph.states:
        raise UnknownValue(f"'{query}' is not a state")
    for node in [query, *sorted(evidence)]:
        if node in graph.states and not opacity.is_transparent(node):
            raise OpaqueQuery(node)
    _domain(graph, query)
    _check_evidence(graph, evidence)

    variables = _ancestral(graph, [query, *evidence])
    needed = set(variables) | {
        graph.cpts[v].source for v in variables if graph.cpts[v].source in graph.models}
    for node in sorted(needed):
        if not opacity.is_transparent(node):
            raise OpaqueQuery(node)
    order = network_order(graph, variables)

    factors = [_factor(graph, v) for v in sorted(variables)]
    for var, value in sorted(evidence.items()):
        index = graph.states[var].domain.index(value)
        factors = [f.reduce(var, index) if var in f.vars else f for f in factors]
    if query in evidence:
        # fully determined; still reject impossible evidence
        joint = _eliminate(factors, [v for v in order if v not in evidence])
        if float(np.sum(joint.table)) <= 0.0:
            raise ZeroProbabilityEvidence()
        return {v: (1.0 if v == evidence[query] else 0.0) for v in graph.states[query].domain}

    joint = _eliminate(factors, [v for v in order if v != query and v not in evidence])
    return _normalize(graph, query, [float(x) for x in joint.table])


def _eliminate(factors: list[Factor], order: list[str]) -> Factor:
    for var in order:
        touching = [f for f in factors if var in f.vars]
        if not touching:
            continue
        rest = [f for f in factors if var not in f.vars]
        prod = touching[0]
        for f in touching[1:]:
            prod = prod * f
        factors = rest + [prod.sum_out(var)]
    result = factors[0]
    for f in factors[1:]:
        result = result * f
    return result


def brute_force_joint(graph: SystemGraph, evidence: Evidence, query: str) -> Distribution:
    """Posterior of ``query`` by enumerating every joint assignment.

    Ignores observers entirely.  Limited to 20 domained states with at most
    four values each.
    """
    evidence = dict(evidence)
    _domain(graph, query)
    _check_evidence(graph, evidence)
    variables = sorted(s for s, st in graph.states.items() if st.domain)
    if len(variables) > MAX_ORACLE_STATES:
        raise TooLarge(f"{len(variables)} domained states exceed {MAX_ORACLE_STATES}")
    sizes = [len(graph.states[v].domain) for v in variables]
    if any(n > MAX_ORACLE_DOMAIN for n in sizes):
        raise TooLarge(f"a domain exceeds {MAX_ORACLE_DOMAIN} values")
    if math.prod(sizes) > MAX_ORACLE_JOINT:
        raise TooLarge(f"joint space of {math.prod(sizes)} assignments is too large")
    cpts = {v: _cpt(graph, v) for v in variables}
    network_order(graph, variables)  # raises CyclicModel

    q_domain = graph.states[query].domain
    weights = dict.fromkeys(q_domain, 0.0)
    for values in product(*(graph.states[v].domain for v in variables)):
        world = dict(zip(variables, values))
        if any(world[k] != v for k, v in evidence.items()):
            continue
        p = 1.0
        for v in variables:
            cpt = cpts[v]
            p *= cpt.prob(world[v], tuple(world[x] for x in cpt.parents))
            if p == 0.0:
                break
        weights[world[query]] += p
    return _normalize(graph, query, [weights[v] for v in q_domain])

