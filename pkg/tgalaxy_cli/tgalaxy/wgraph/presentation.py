"""
Presentation documents for (possibly infinite) wgraphs of rank <= omega.

A presentation is a finite core block plus one-ended arms: copies 0, 1, 2, ...
of a cell block glued right-port to left-port, copy 0 attached to core ports.
Documents are JSON; unknown keys are rejected.
"""
import json
import threading
from pathlib import Path
from typing import Annotated, Any, Dict, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    PrivateAttr,
    ValidationError,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from tgalaxy.core.errors import InvalidPresentation, UnknownNode
from tgalaxy.ordinal.arith import ARROW_OMEGA, OMEGA, ExtRank, parse_rank
from tgalaxy.wgraph.refs import WNodeRef, is_identifier, parse_ref, split_local

# guards the lazy CompiledGraph of every presentation
_COMPILE_LOCK = threading.RLock()

_RANK_SCHEMA = {"oneOf": [{"type": "integer", "minimum": 0}, {"enum": ["warrow", "omega"]}]}
_TIP_RANK_SCHEMA = {"oneOf": [{"type": "integer", "minimum": -1}, {"enum": ["warrow"]}]}

Rank = Annotated[
    ExtRank,
    PlainValidator(lambda v: parse_rank(v)),
    PlainSerializer(lambda r: r.to_json()),
    WithJsonSchema(_RANK_SCHEMA),
]
TipRank = Annotated[
    ExtRank,
    PlainValidator(lambda v: parse_rank(v, allow_minus_one=True)),
    PlainSerializer(lambda r: r.to_json()),
    WithJsonSchema(_TIP_RANK_SCHEMA),
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TipDecl(_Strict):
    rank: TipRank
    ray: Optional[str] = None
    node: Optional[str] = None
    arm: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        sources = [s for s in (self.ray, self.node, self.arm) if s is not None]
        if len(sources) != 1:
            raise ValueError("a tip names exactly one of ray, node, arm")
        if self.node is not None and not self.rank.is_minus_one:
            raise ValueError("node tips are branch extremities and have rank -1")
        if self.ray is not None and self.rank != ExtRank.fin(0):
            raise ValueError("a ray carries a 0-tip")
        if self.rank.is_omega:
            raise ValueError("tips have rank below omega")
        return self


class WNodeDecl(_Strict):
    id: str
    rank: Rank
    embraces: Tuple[str, ...] = ()
    tips: Tuple[TipDecl, ...] = ()

    @field_validator("id")
    @classmethod
    def _ident(cls, v):
        if not is_identifier(v):
            raise ValueError(f"bad wnode id {v!r}")
        return v


class RayDecl(_Strict):
    id: str


class Block(_Strict):
    nodes: Tuple[str, ...] = ()
    branches: Tuple[Tuple[str, str], ...] = ()
    rays: Tuple[RayDecl, ...] = ()
    wnodes: Tuple[WNodeDecl, ...] = ()
    ports: Dict[str, str] = Field(default_factory=dict)

    def rank_of(self, local: str) -> Optional[ExtRank]:
        """Rank of a block-local id, None when undeclared."""
        name, pos = split_local(local)
        if pos is not None:
            return ExtRank.fin(0) if any(r.id == name for r in self.rays) else None
        if local in self.nodes:
            return ExtRank.fin(0)
        for w in self.wnodes:
            if w.id == local:
                return w.rank
        return None

    def wnode(self, local: str) -> Optional[WNodeDecl]:
        return next((w for w in self.wnodes if w.id == local), None)


class Arm(_Strict):
    id: str
    cell: Block
    gluing: Dict[str, str] = Field(default_factory=dict)
    attach: Dict[str, str] = Field(default_factory=dict)
    apex: Optional[WNodeDecl] = None


class WGraphPresentation(_Strict):
    rank: Rank
    core: Block
    arms: Tuple[Arm, ...] = ()
    aliases: Dict[str, str] = Field(default_factory=dict)
    hypernodes: Dict[str, str] = Field(default_factory=dict)

    _compiled: Any = PrivateAttr(default=None)

    def arm(self, arm_id: str) -> Arm:
        for a in self.arms:
            if a.id == arm_id:
                return a
        raise UnknownNode(arm_id)

    def resolve(self, ref: Union[str, WNodeRef]) -> WNodeRef:
        """Turn an alias or reference text into a checked WNodeRef."""
        if isinstance(ref, WNodeRef):
            node = ref
        else:
            text = ref.strip()
            node = parse_ref(self.aliases.get(text, text))
        if self.rank_of(node) is None:
            raise UnknownNode(str(node))
        return node

    def block_of(self, node: WNodeRef) -> Optional[Block]:
        if node.is_core:
            return self.core
        try:
            return self.arm(node.scope).cell
        except UnknownNode:
            return None

    def rank_of(self, node: WNodeRef) -> Optional[ExtRank]:
        if node.is_apex:
            try:
                apex = self.arm(node.scope).apex
            except UnknownNode:
                return None
            return apex.rank if apex is not None and apex.id == node.local else None
        if node.block is not None and node.block < 0:
            return None
        block = self.block_of(node)
        if block is None:
            return None
        return block.rank_of(node.cell_local)

    def declared_wnodes(self):
        """(scope, declaration) for every wnode, apexes included."""
        for w in self.core.wnodes:
            yield "", w
        for a in self.arms:
            for w in a.cell.wnodes:
                yield a.id, w
            if a.apex is not None:
                yield a.id, a.apex

    def ranks(self):
        """Ranks 0..nu that section and galaxy queries accept, ascending."""
        if self.rank.is_finite:
            return [ExtRank.fin(k) for k in range(self.rank.k + 1)]
        top = max([w.rank.k for _, w in self.declared_wnodes() if w.rank.is_finite] + [0])
        out = [ExtRank.fin(k) for k in range(top + 1)] + [ARROW_OMEGA]
        return out + [OMEGA] if self.rank.is_omega else out

    def alias_of(self, node: WNodeRef) -> str:
        text = str(node)
        for name, target in sorted(self.aliases.items()):
            if target == text:
                return name
        return text

    def compiled(self):
        with _COMPILE_LOCK:
            if self._compiled is None:
                from tgalaxy.wgraph.unroll import CompiledGraph

                self._compiled = CompiledGraph(self)
        return self._compiled


def load_presentation(source: Union[str, Path, Dict]) -> WGraphPresentation:
    """Parse a presentation from a dict, JSON text or a path; errors become InvalidPresentation."""
    from tgalaxy.wgraph.validate import Violation

    try:
        if isinstance(source, dict):
            return WGraphPresentation.model_validate(source)
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            source = Path(source).read_text(encoding="utf-8")
        return WGraphPresentation.model_validate_json(source)
    except ValidationError as exc:
        raise InvalidPresentation(
            Violation("SchemaViolation", ".".join(str(p) for p in err["loc"]) or "$", err["msg"])
            for err in exc.errors()
        ) from exc


def dump_presentation(g: WGraphPresentation) -> str:
    return json.dumps(g.model_dump(mode="json", exclude_defaults=True), indent=2, sort_keys=True)
