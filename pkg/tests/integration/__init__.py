"""Integration test module initialization."""
