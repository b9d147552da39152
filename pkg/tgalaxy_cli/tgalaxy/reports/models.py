"""
Machine-readable report documents.

Every `--format json` report is built as a plain dict by the engines, validated
against one of these models and dumped with sorted keys.
"""
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

Rank = Union[int, str]


class _Report(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ViolationRecord(_Report):
    kind: str
    where: str
    message: str = ""


class ValidationReport(_Report):
    rank: Rank
    valid: bool
    violations: List[ViolationRecord]


class UnrolledNode(_Report):
    id: str
    rank: Rank
    aliases: List[str]


class UnrolledBranch(_Report):
    id: str
    ends: Tuple[str, str]


class UnrolledTip(_Report):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    from_: str = Field(alias="from")
    to: str
    rank: str
    source: str


class UnrollReport(_Report):
    depth: int
    nodes: List[UnrolledNode]
    branches: List[UnrolledBranch]
    tips: List[UnrolledTip]
    embraces: List[Tuple[str, str]]


class WalkRecord(_Report):
    nodes: List[str]
    steps: List[str]
    length: str


class DistanceReport(_Report):
    source: str
    target: str
    distance: str
    walk: Optional[WalkRecord] = None
    oracle: Optional[str] = None
    oracle_agrees: Optional[bool] = None


class SectionRecord(_Report):
    rank: Rank
    id: str
    fixed: List[str]
    tails: List[Dict[str, Union[str, int, List[str]]]]
    family: Optional[Dict[str, Union[str, int, List[List[Union[int, str]]]]]] = None
    instance: Optional[int] = None
    boundary: Optional[List[str]] = None
    locally_finite: Optional[bool] = None


class SectionsReport(_Report):
    rank: Rank
    sections: List[SectionRecord]


class SectionBoundary(_Report):
    section: str
    boundary_wnodes: List[str]
    infinite: bool


class BoundaryReport(_Report):
    rank: Rank
    copy_index: Optional[int] = None
    sections: List[SectionBoundary]


class LocalFinitenessReport(_Report):
    rank: Rank
    sections: Dict[str, bool]


class EscapePick(_Report):
    step: int
    wnode: str
    distance: str
    bound: str


class EscapeReport(_Report):
    rank: Rank
    section: str
    start: str
    picks: List[EscapePick]
    presentation: Optional[str] = None
    outside_principal: Optional[bool] = None


class ResidueVerdict(_Report):
    modulus: int
    residue: int
    verdict: Literal["Yes", "No"]
    mu: Optional[int] = None


class VerdictRecord(_Report):
    a: str
    b: str
    verdict: Literal["Yes", "No", "UltrafilterDependent"]
    mu: Optional[int] = None
    per_residue: Optional[List[ResidueVerdict]] = None


class GalaxyClassRecord(_Report):
    id: str
    members: List[str]
    principal: bool


class PartitionReport(_Report):
    rank: Rank
    reference: str
    classes: List[GalaxyClassRecord]
    verdicts: List[VerdictRecord]
    ambiguities: List[VerdictRecord]


class Regression(_Report):
    reference: str
    mismatches: List[str]


class ClosenessOrderReport(_Report):
    rank: Rank
    classes: List[GalaxyClassRecord]
    edges: List[Tuple[str, str]]
    hasse: List[Tuple[str, str]]
    incomparable: List[Tuple[str, str]]
    ambiguous: List[VerdictRecord]
    antisymmetric: bool
    transitive: bool
    acyclic: bool
    total: bool
    regression: Optional[Regression] = None


class ChainLink(_Report):
    name: str
    presentation: str
    sandwich: bool
    non_principal: bool


class PairwiseCloseness(_Report):
    closer: str
    farther: str
    verdict: Literal["Yes", "No", "UltrafilterDependent"]
    mu: Optional[int] = None
    per_residue: Optional[List[ResidueVerdict]] = None


class WitnessChainReport(_Report):
    rank: Rank
    around: str
    chain: List[ChainLink]
    pairwise: List[PairwiseCloseness]
    reverse_ok: bool
    ok: bool


class CheckResult(_Report):
    check: str
    rank: Rank
    ok: bool
    details: Dict


class CheckReport(_Report):
    digest: str
    checks: List[CheckResult]
    ok: bool


class OracleMismatch(_Report):
    x: str
    y: str
    search: str
    oracle: str


class OracleCheckReport(_Report):
    depth: int
    pairs_checked: int
    skipped: int = 0
    mismatches: List[OracleMismatch]
    ok: bool


REPORT_MODELS = {
    "validate": ValidationReport,
    "unroll": UnrollReport,
    "distance": DistanceReport,
    "sections": SectionsReport,
    "boundary": BoundaryReport,
    "locally-finite": LocalFinitenessReport,
    "escape-walk": EscapeReport,
    "classify": PartitionReport,
    "order": ClosenessOrderReport,
    "witness-chain": WitnessChainReport,
    "check": CheckReport,
    "oracle-check": OracleCheckReport,
}
