"""
Structured Output Models for Experiment Artifacts
=================================================
Pydantic models for everything an experiment writes: CSV tables with a
provenance comment line and single-object JSON reports.

Artifacts are byte-identical across reruns with the same configuration:
floats render with repr, rationals as "num/den", keys are sorted and no
timestamps are recorded.

Features:
- ResultTable: named columns, validated row width, CSV rendering
- Report: one JSON object for certificates and diagnostics
- Value normalisation for Fraction, complex, numpy scalars and NaN
"""

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, Field, field_validator

from utils import format_rational


def to_jsonable(value: Any) -> Any:
    """Recursively convert results into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': to_jsonable(float(value.real)), 'im': to_jsonable(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def format_cell(value: Any) -> str:
    """Render one CSV cell."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError("complex values must be split into re/im columns")
    return str(value)


class ResultTable(BaseModel):
    """
    A CSV table with provenance.

    Attributes:
        name: Experiment name
        columns: Column names, in order
        rows: Row values (one entry per column)
        provenance: Full resolved configuration of the run
    """
    name: str = Field(..., description="Experiment name")
    columns: List[str] = Field(..., min_length=1, description="Column names")
    rows: List[List[Any]] = Field(default_factory=list, description="Table rows")
    provenance: Dict[str, Any] = Field(default_factory=dict, description="Resolved configuration")

    @field_validator('columns')
    @classmethod
    def validate_columns(cls, v: List[str]) -> List[str]:
        if len(set(v)) != len(v):
            raise ValueError("column names must be unique")
        return v

    def add_row(self, row: Dict[str, Any]) -> None:
        """Append a row given as a mapping from column name to value."""
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ValueError(f"row is missing columns {missing}")
        self.rows.append([row[c] for c in self.columns])

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def render_csv(self) -> str:
        """Provenance comment line, header row, then the rows."""
        buffer = io.StringIO()
        buffer.write('# config: ' + json.dumps(to_jsonable(self.provenance), sort_keys=True) + '\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(v) for v in row])
        return buffer.getvalue()


class Report(BaseModel):
    """A single JSON object (certificate or diagnostic report) with provenance."""
    name: str = Field(..., description="Experiment name")
    payload: Dict[str, Any] = Field(default_factory=dict, description="Report body")
    provenance: Dict[str, Any] = Field(default_factory=dict, description="Resolved configuration")

    def render_json(self) -> str:
        body = {'experiment': self.name, 'config': self.provenance, 'result': self.payload}
        return json.dumps(to_jsonable(body), sort_keys=True, indent=2) + '\n'


def render(artifact: Any) -> str:
    """Render a ResultTable as CSV or a Report as JSON."""
    if isinstance(artifact, ResultTable):
        return artifact.render_csv()
    if isinstance(artifact, Report):
        return artifact.render_json()
    raise TypeError(f"cannot render {type(artifact).__name__}")
