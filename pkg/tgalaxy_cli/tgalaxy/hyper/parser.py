"""
Text syntax for hypernode presentations.

    std(x1)
    arm(ladder, 1, 0, x)            index 1*n + 0
    arm(ladder, 1, 0, x, 2, 1)      index max(1, (1*n + 0) // 2)
    arm(ladder, [0, 0, 1], x)       index n^2
    ray(ladder[2].P, 1, 0)          positions n along one ray instance
    interleave(2, std(x1), arm(ladder, 1, 0, x))
    patch(arm(ladder, 1, 0, x), {3: x0})
"""
import re
from typing import Callable, List, Optional

from tgalaxy.core.errors import PresentationSyntaxError
from tgalaxy.hyper.presentations import (
    ArmIndexed,
    FinitePatch,
    IndexMap,
    Interleave,
    Presentation,
    RayIndexed,
    Standard,
)
from tgalaxy.wgraph.refs import WNodeRef, parse_ref

Resolver = Callable[[str], WNodeRef]


class _Parser:
    def __init__(self, text: str, resolver: Optional[Resolver]):
        self.text = text
        self.pos = 0
        self.resolver = resolver or parse_ref

    def error(self, message: str, at: Optional[int] = None):
        raise PresentationSyntaxError(message, self.text, self.pos if at is None else at)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def integer(self) -> int:
        self.skip()
        m = re.compile(r"-?\d+").match(self.text, self.pos)
        if not m:
            self.error("expected an integer")
        self.pos = m.end()
        return int(m.group(0))

    def word(self) -> str:
        self.skip()
        m = re.compile(r"[A-Za-z0-9_\-'\.@]+(?:\[\d+\][A-Za-z0-9_\-'\.@]*)?").match(self.text, self.pos)
        if not m:
            self.error("expected a name")
        self.pos = m.end()
        return m.group(0)

    def node(self) -> WNodeRef:
        start = self.pos
        text = self.word()
        try:
            return self.resolver(text)
        except PresentationSyntaxError as exc:
            raise PresentationSyntaxError(str(exc), self.text, start) from exc
        except KeyError as exc:
            raise PresentationSyntaxError(f"unknown node {text!r}", self.text, start) from exc

    def index_tail(self, coeffs) -> IndexMap:
        divisor, floor = 1, 0
        if self.peek() == "," and self._next_is_int():
            self.expect(",")
            divisor = self.integer()
            self.expect(",")
            floor = self.integer()
        try:
            return IndexMap(tuple(coeffs), divisor, floor)
        except ValueError as exc:
            self.error(str(exc))

    def _next_is_int(self) -> bool:
        save = self.pos
        self.pos += 1
        self.skip()
        ok = bool(re.compile(r"-?\d+\s*[,)]").match(self.text, self.pos))
        self.pos = save
        return ok

    def coefficients(self) -> List[int]:
        """`a, b` (index a*n + b) or `[c0, c1, ...]`."""
        if self.accept("["):
            out = [self.integer()]
            while self.accept(","):
                out.append(self.integer())
            self.expect("]")
            return out
        a = self.integer()
        self.expect(",")
        b = self.integer()
        return [b, a]

    def presentation(self) -> Presentation:
        self.skip()
        start = self.pos
        head = self.word()
        self.expect("(")
        if head == "std":
            p = Standard(self.node())
        elif head == "arm":
            arm = self.word()
            self.expect(",")
            coeffs = self.coefficients()
            self.expect(",")
            local = self.word()
            p = ArmIndexed(arm, self.index_tail(coeffs), local)
        elif head == "ray":
            where = self.pos
            text = self.word()
            try:
                ref = parse_ref(text)
            except PresentationSyntaxError:
                self.error(f"not a ray instance: {text!r}", where)
            if ref.is_ray:
                self.error("a ray instance names no position", where)
            self.expect(",")
            coeffs = self.coefficients()
            p = RayIndexed(ref.scope, ref.block, ref.local, self.index_tail(coeffs))
        elif head == "interleave":
            m = self.integer()
            branches = []
            while self.accept(","):
                branches.append(self.presentation())
            if m < 2 or len(branches) != m:
                self.error(f"interleave({m}, ...) needs exactly {m} >= 2 branches", start)
            self.expect(")")
            return Interleave(tuple(branches))
        elif head == "patch":
            base = self.presentation()
            self.expect(",")
            self.expect("{")
            overrides = {}
            if not self.accept("}"):
                while True:
                    n = self.integer()
                    if n < 0:
                        self.error("patch indices are natural numbers")
                    self.expect(":")
                    overrides[n] = self.node()
                    if self.accept("}"):
                        break
                    self.expect(",")
            p = FinitePatch(base, tuple(overrides.items()))
        else:
            self.error(f"unknown presentation form {head!r}", start)
        self.expect(")")
        return p

    def parse(self) -> Presentation:
        p = self.presentation()
        self.skip()
        if self.pos != len(self.text):
            self.error("trailing text")
        return p


def parse_presentation(text: str, resolver: Optional[Resolver] = None) -> Presentation:
    """Parse presentation text; node names go through `resolver` (aliases, validation)."""
    return _Parser(text, resolver).parse()
