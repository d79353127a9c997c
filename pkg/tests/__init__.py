"""Pytest tests folder for all unit, integration test and supporting fixtures."""
