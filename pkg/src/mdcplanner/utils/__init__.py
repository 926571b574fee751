"""Shared utilities: exceptions, validators and helpers."""
