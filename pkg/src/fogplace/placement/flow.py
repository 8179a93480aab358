"""Successive-shortest-path min-cost flow on small dense-ish networks.

Float costs are fine; with integral capacities every augmentation is
integral, so the optimum is integral too.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

INF = float("inf")
EPS = 1e-13


@dataclass
class _Arc:
    to: int
    cap: float
    cost: float
    rev: int
    flow: float = 0.0


@dataclass
class FlowNetwork:
    names: list[str] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)
    adj: list[list[_Arc]] = field(default_factory=list)

    def node(self, name: str) -> int:
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
            self.adj.append([])
        return self.index[name]

    def add_arc(self, u: str, v: str, cap: float, cost: float) -> tuple[int, int]:
        iu, iv = self.node(u), self.node(v)
        self.adj[iu].append(_Arc(iv, cap, cost, len(self.adj[iv])))
        self.adj[iv].append(_Arc(iu, 0.0, -cost, len(self.adj[iu]) - 1))
        return iu, len(self.adj[iu]) - 1

    def flow_on(self, handle: tuple[int, int]) -> float:
        u, k = handle
        return self.adj[u][k].flow

    def _shortest(self, s: int) -> tuple[list[float], list[tuple[int, int] | None]]:
        # SPFA: residual graph may carry negative reverse-arc costs
        n = len(self.names)
        dist = [INF] * n
        prev: list[tuple[int, int] | None] = [None] * n
        inq = [False] * n
        dist[s] = 0.0
        q = deque([s])
        inq[s] = True
        while q:
            u = q.popleft()
            inq[u] = False
            du = dist[u]
            for k, arc in enumerate(self.adj[u]):
                if arc.cap - arc.flow <= 1e-12:
                    continue
                nd = du + arc.cost
                # relative slack: rounding can make zero-cost residual cycles look negative
                if nd < dist[arc.to] - EPS * (1.0 + abs(nd)):
                    dist[arc.to] = nd
                    prev[arc.to] = (u, k)
                    if not inq[arc.to]:
                        inq[arc.to] = True
                        q.append(arc.to)
        return dist, prev

    def min_cost_flow(self, source: str, sink: str, demand: float) -> tuple[float, float]:
        """Push up to ``demand`` units; returns (flow, cost)."""
        s, t = self.node(source), self.node(sink)
        flow = cost = 0.0
        while flow < demand - 1e-12:
            dist, prev = self._shortest(s)
            if dist[t] == INF:
                break
            push = demand - flow
            v = t
            while v != s:
                u, k = prev[v]
                arc = self.adj[u][k]
                push = min(push, arc.cap - arc.flow)
                v = u
            v = t
            while v != s:
                u, k = prev[v]
                arc = self.adj[u][k]
                arc.flow += push
                self.adj[v][arc.rev].flow -= push
                v = u
            flow += push
            cost += push * dist[t]
        return flow, cost
