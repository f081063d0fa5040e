"""Typed errors shared by every stage of the pipeline.

The set is closed: each failure mode gets exactly one subclass of
:class:`PipelineError`, and the variant name is the first token of
``str(err)``.  The CLI prints that name on exit code 1, so the names are
part of the command-line contract and must stay stable.
"""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all pipeline failures.

    ``detail`` is a human-readable explanation; ``source``, ``sheet`` and
    ``row`` locate the offending input where that makes sense.
    """

    def __init__(self, detail: str, *, source: str | None = None,
                 sheet: str | None = None, row: int | None = None):
        self.detail = detail
        self.source = source
        self.sheet = sheet
        self.row = row
        super().__init__(detail)

    @property
    def variant(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:
        where = []
        if self.source is not None:
            where.append(f"source={self.source}")
        if self.sheet is not None:
            where.append(f"sheet={self.sheet}")
        if self.row is not None:
            where.append(f"row={self.row}")
        suffix = f" [{', '.join(where)}]" if where else ""
        return f"{self.variant}: {self.detail}{suffix}"


class MalformedDocument(PipelineError):
    """Input file is structurally unusable (bad ZIP, bad XML, bad schema)."""


class UnknownSheet(PipelineError):
    """Requested sheet is not present in the workbook."""


class UnknownTable(PipelineError):
    """Table code is not in the registry."""


class UnknownFamily(PipelineError):
    """Family (type code) is not in the registry."""


class UnknownPurpose(PipelineError):
    """Purpose does not identify a table within the family."""


class UnknownDomain(PipelineError):
    """Deprivation domain name is not one of the supported values."""


class UnsupportedYear(PipelineError):
    """No source is configured for the requested year."""


class AmbiguousRequest(PipelineError):
    """Request selectors are missing, or conflict with each other."""


class NoHeader(PipelineError):
    """No row in the sheet qualifies as a header row."""


class ShapeMismatch(PipelineError):
    """Cleaned table shape differs from the registry's expected shape."""


class NetworkError(PipelineError):
    """Download failed (transport error or non-success HTTP status)."""


class IntegrityFailure(PipelineError):
    """Downloaded bytes do not match the declared checksum."""


class CacheMiss(PipelineError):
    """Offline fetch requested but the cache has no entry."""


class DuplicateKey(PipelineError):
    """Join key is not unique on the right-hand table."""


class MissingKeyColumn(PipelineError):
    """A named column is absent (or has the wrong type for a key)."""


class MissingCodeProperty(PipelineError):
    """A boundary feature lacks the configured area-code property."""


class NonNumericColumn(PipelineError):
    """Operation needs a numeric column but got text/bool."""


class EmptyInput(PipelineError):
    """Operation needs at least one value/row and got none."""
