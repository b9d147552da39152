from tgalaxy.sections.engine import (
    SectionEngine,
    adjacency_check,
    boundary_wnodes,
    connecting_walk,
    escape_presentation,
    escape_walk,
    has_infinite_boundary,
    incident,
    incident_sections,
    is_boundary,
    locally_rho_finite,
    section_of,
    wadjacent,
    wsections,
)
from tgalaxy.sections.model import ArmTail, SectionFamily, SectionRef, nested
