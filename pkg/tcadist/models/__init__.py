"""Pydantic models for file documents and printed reports."""
