"""Core services: errors, artifact formats, pipeline orchestration."""
