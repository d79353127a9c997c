"""Tests for core functionality."""
