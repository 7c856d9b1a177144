"""Config loading, unit conversion and deterministic scans."""
