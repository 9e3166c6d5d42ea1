"""Core types, settings, configuration, logging and seeding shared by every package."""
