"""Tests for models."""
