"""feedgrid: hourly publisher-post aggregation, engagement ranking, and serving."""

__version__ = "0.1.0"
