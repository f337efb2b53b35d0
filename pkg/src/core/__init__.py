"""Configuration, logging, errors and shared types."""
