class SchemaError(ValueError):
    """A run artifact is missing or does not match the documented schema."""


class NoDataError(ValueError):
    """The run directory holds no data for the requested figure."""
