"""Error type shared across the exporter."""


class ExportError(Exception):
    """Invalid input, configuration, or model artifact.

    Raised for anything the caller can fix: malformed datasets, unknown
    model identifiers, out-of-range outputs. Environment failures (missing
    directories, permission problems) surface as OSError instead.
    """
