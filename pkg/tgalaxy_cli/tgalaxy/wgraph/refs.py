"""
Names for individual wnodes and branches of a presented wgraph.

    a            core node
    P@5          position 5 of core ray P
    arm[3].x     node x of copy 3 of arm `arm`
    arm[3].P@5   position 5 of ray P in copy 3
    arm.top      apex of arm `arm`
"""
import re
from dataclasses import dataclass
from typing import Optional

from tgalaxy.core.errors import PresentationSyntaxError

IDENT = r"[A-Za-z0-9_\-']+"
_REF_RE = re.compile(
    rf"^(?:(?P<scope>{IDENT})(?:\[(?P<block>\d+)\])?\.)?(?P<local>{IDENT})(?:@(?P<pos>\d+))?$"
)
_IDENT_RE = re.compile(rf"^{IDENT}$")


def is_identifier(text: str) -> bool:
    return bool(_IDENT_RE.match(text))


@dataclass(frozen=True)
class WNodeRef:
    scope: str = ""
    block: Optional[int] = None
    local: str = ""
    position: Optional[int] = None

    @classmethod
    def core(cls, local: str) -> "WNodeRef":
        return cls("", None, local, None)

    @classmethod
    def arm(cls, arm_id: str, block: int, local: str) -> "WNodeRef":
        return cls(arm_id, block, local, None)

    @classmethod
    def ray(cls, scope: str, block: Optional[int], ray_id: str, position: int) -> "WNodeRef":
        return cls(scope, block, ray_id, position)

    @classmethod
    def apex(cls, arm_id: str, local: str) -> "WNodeRef":
        return cls(arm_id, None, local, None)

    @property
    def is_core(self) -> bool:
        return not self.scope

    @property
    def is_apex(self) -> bool:
        return bool(self.scope) and self.block is None

    @property
    def is_ray(self) -> bool:
        return self.position is not None

    @property
    def prefix(self) -> str:
        """Instance prefix shared by every node of the same block copy."""
        if not self.scope:
            return ""
        if self.block is None:
            return f"{self.scope}."
        return f"{self.scope}[{self.block}]."

    @property
    def cell_local(self) -> str:
        """Id inside the block declaration (ray nodes keep their position)."""
        return f"{self.local}@{self.position}" if self.is_ray else self.local

    @property
    def copy_index(self) -> int:
        """-1 for core and apex nodes, otherwise the arm copy index."""
        return -1 if self.block is None else self.block

    def with_position(self, position: int) -> "WNodeRef":
        return WNodeRef(self.scope, self.block, self.local, position)

    def __str__(self):
        return f"{self.prefix}{self.cell_local}"


def parse_ref(text: str) -> WNodeRef:
    m = _REF_RE.match(text.strip())
    if not m:
        raise PresentationSyntaxError(f"not a node reference: {text!r}", text, 0)
    scope = m.group("scope") or ""
    block = m.group("block")
    pos = m.group("pos")
    return WNodeRef(scope, int(block) if block is not None else None, m.group("local"), int(pos) if pos is not None else None)


def split_local(local: str):
    """`P@3` -> ("P", 3); `a` -> ("a", None)."""
    if "@" in local:
        ray_id, pos = local.split("@", 1)
        return ray_id, int(pos)
    return local, None


def branch_id(prefix: str, u: str, v: str) -> str:
    return f"{prefix}{u}~{v}"


def ray_branch_id(prefix: str, ray_id: str, position: int) -> str:
    """Branch joining positions `position` and `position + 1` of a ray."""
    return f"{prefix}{ray_id}@{position}+"


@dataclass(frozen=True)
class BranchKey:
    scope: str
    block: Optional[int]
    local: str  # "u~v" for declared branches, "P@*" for any branch of ray P

    @property
    def prefix(self) -> str:
        return WNodeRef(self.scope, self.block).prefix

    def __str__(self):
        return f"{self.prefix}{self.local}"


_BRANCH_RE = re.compile(
    rf"^(?:(?P<scope>{IDENT})(?:\[(?P<block>\d+)\])?\.)?(?P<body>.+)$"
)


def parse_branch_id(text: str) -> BranchKey:
    m = _BRANCH_RE.match(text)
    if not m:
        raise PresentationSyntaxError(f"not a branch id: {text!r}", text, 0)
    body = m.group("body")
    if body.endswith("+") and "@" in body:
        body = body.split("@", 1)[0] + "@*"
    block = m.group("block")
    return BranchKey(m.group("scope") or "", int(block) if block is not None else None, body)


def branch_key(branch: str) -> str:
    """Canonical membership key: ray branches collapse to `prefixP@*`."""
    return str(parse_branch_id(branch))
