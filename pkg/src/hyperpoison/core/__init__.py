"""Core functionality for hyperpoison."""
