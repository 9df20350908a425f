"""Tests for the patchy package."""
