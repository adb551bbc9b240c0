"""CLI for hyperpoison."""
