"""
Named hypernode presentations over one wgraph.

The context plays the part of the enlargement: it holds the graph plus a finite
set of presentations, and every query checks that its arguments belong to it.
"""
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

from tgalaxy.core.errors import ContextMismatch, InvalidPresentation, UnknownNode
from tgalaxy.core.utils import get_logger
from tgalaxy.hyper.parser import parse_presentation
from tgalaxy.hyper.presentations import Interleave, Presentation, Standard, is_standard
from tgalaxy.wgraph.presentation import WGraphPresentation
from tgalaxy.wgraph.unroll import iter_atoms, ref_key

logger = get_logger("hyper")

CHECK_INDICES = range(0, 8)


@dataclass(frozen=True, eq=False)
class Hypernode:
    ctx: "EnlargementContext"
    name: str
    presentation: Presentation

    @property
    def is_standard(self) -> bool:
        return is_standard(self.presentation)

    def node_at(self, n: int):
        return self.presentation.node_at(n)

    def __str__(self):
        return self.name


class EnlargementContext:
    def __init__(self, graph: WGraphPresentation, presentations: Optional[Dict[str, Presentation]] = None):
        self.graph = graph
        self._hypernodes: Dict[str, Hypernode] = {}
        self._distance_cache: Dict[tuple, list] = {}
        self._lock = threading.Lock()
        for name, p in sorted((presentations or {}).items()):
            self.add(name, p)

    @classmethod
    def from_graph(cls, graph: WGraphPresentation) -> "EnlargementContext":
        """Context of the presentations the graph document declares under `hypernodes`."""
        ctx = cls(graph)
        for name, text in sorted(graph.hypernodes.items()):
            ctx.add(name, text)
        return ctx

    def parse(self, text: str) -> Presentation:
        return parse_presentation(text, self.graph.resolve)

    def add(self, name: str, presentation: Union[str, Presentation]) -> Hypernode:
        if isinstance(presentation, str):
            presentation = self.parse(presentation)
        self._check(name, presentation)
        h = Hypernode(self, name, presentation)
        self._hypernodes[name] = h
        return h

    def _check(self, name: str, p: Presentation):
        from tgalaxy.wgraph.validate import Violation

        ranks = set()
        for n in CHECK_INDICES:
            node = p.node_at(n)
            rank = self.graph.rank_of(node)
            if rank is None:
                raise UnknownNode(f"{node} (index {n} of {name})")
            ranks.add(rank)
        if isinstance(p, Interleave):
            tail = {self.graph.rank_of(b.node_at(64)) for b in p.branches}
            if len(tail) > 1:
                raise InvalidPresentation([Violation("InterleaveRank", name, "branches carry different ranks")])

    def __contains__(self, name: str) -> bool:
        return name in self._hypernodes

    def __getitem__(self, name: str) -> Hypernode:
        try:
            return self._hypernodes[name]
        except KeyError:
            raise UnknownNode(name) from None

    def names(self) -> List[str]:
        return sorted(self._hypernodes)

    def hypernodes(self) -> List[Hypernode]:
        return [self._hypernodes[n] for n in self.names()]

    def presentations(self) -> Dict[str, Presentation]:
        return {n: h.presentation for n, h in self._hypernodes.items()}

    def own(self, h: Union[Hypernode, str]) -> Hypernode:
        """Look a name up, or check that a hypernode was built by this context."""
        if isinstance(h, str):
            return self[h]
        if h.ctx is not self:
            raise ContextMismatch(f"{h.name} belongs to another context")
        return h

    def standard_names(self) -> List[str]:
        return [n for n in self.names() if self._hypernodes[n].is_standard]

    def reference_name(self) -> Optional[str]:
        names = self.standard_names()
        return names[0] if names else None

    def copy(self, extra: Optional[Dict[str, Presentation]] = None) -> "EnlargementContext":
        """New context over the same graph; shares the distance cache."""
        out = EnlargementContext(self.graph)
        out._distance_cache = self._distance_cache
        out._lock = self._lock
        for name, p in sorted({**self.presentations(), **(extra or {})}.items()):
            out.add(name, p)
        return out

    def with_reference(self) -> "EnlargementContext":
        """This context if it has a standard presentation; otherwise a copy with std(least core node)."""
        if self.reference_name() is not None:
            return self
        core = [a for a in iter_atoms(self.graph.compiled().frame(1), "") if a.block is None]
        if not core:
            raise UnknownNode("graph has no core node to serve as reference")
        node = min(core, key=ref_key)
        p = Standard(node)
        logger.info("no standard presentation supplied; adding %s as reference", p.format())
        return self.copy({p.format(): p})

    def cached_distance(self, key, compute):
        with self._lock:
            hit = self._distance_cache.get(key)
        if hit is not None:
            return hit
        value = compute()
        with self._lock:
            self._distance_cache.setdefault(key, value)
        return value
