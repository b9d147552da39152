"""
Schema registry for the presentation document and every report document.
"""
from typing import Any, Dict

from pydantic import BaseModel

from tgalaxy.reports.models import REPORT_MODELS
from tgalaxy.wgraph.presentation import WGraphPresentation


class SchemaRegistry:
    """JSON schemas of the input presentation and of the `--format json` reports."""

    def __init__(self):
        self.models = self._initialize_models()
        self.schemas = {name: model.model_json_schema(by_alias=True) for name, model in self.models.items()}

    def get_schema(self, name: str) -> Dict[str, Any]:
        if name not in self.schemas:
            raise ValueError(f"Schema not found for document type: {name}")
        return self.schemas[name]

    def get_model(self, name: str) -> type[BaseModel]:
        if name not in self.models:
            raise ValueError(f"Schema not found for document type: {name}")
        return self.models[name]

    def get_available_entities(self) -> list[str]:
        return sorted(self.schemas)

    def validate_report(self, name: str, report: Dict[str, Any]) -> Dict[str, Any]:
        """Validate a report dict against its model and return the canonical dump."""
        model = self.get_model(name)
        return model.model_validate(report).model_dump(mode="json", by_alias=True, exclude_none=True)

    @staticmethod
    def _initialize_models() -> Dict[str, type[BaseModel]]:
        return {"presentation": WGraphPresentation, **{f"report.{k}": v for k, v in REPORT_MODELS.items()}}
