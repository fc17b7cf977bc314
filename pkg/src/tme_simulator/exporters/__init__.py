"""File writers and readers for generated cohorts."""

from .formats import (
    INSTANCE_MAXVAL,
    MASK_MAXVAL,
    decode_multiplex,
    decode_pgm,
    encode_multiplex,
    encode_pgm,
    read_bytes,
    read_label_mask,
    read_multiplex,
    write_bytes,
    write_label_mask,
    write_multiplex,
)
from .reports import (
    CELL_COLUMNS,
    decode_cell_coverage,
    encode_csv,
    encode_summary,
    report_tables,
    summary_document,
    telemetry_frame,
    write_report,
)

__all__ = [
    "INSTANCE_MAXVAL",
    "MASK_MAXVAL",
    "decode_multiplex",
    "decode_pgm",
    "encode_multiplex",
    "encode_pgm",
    "read_bytes",
    "read_label_mask",
    "read_multiplex",
    "write_bytes",
    "write_label_mask",
    "write_multiplex",
    "CELL_COLUMNS",
    "decode_cell_coverage",
    "encode_csv",
    "encode_summary",
    "report_tables",
    "summary_document",
    "telemetry_frame",
    "write_report",
]
