"""Dependency injection containers for Statepipe."""
