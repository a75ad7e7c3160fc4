"""Infrared: a plugin-based CLI for OpenStack deployments."""
