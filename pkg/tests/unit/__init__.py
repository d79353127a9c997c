"""Test module initialization."""
