"""Verification harness: corpora, boundedness checks, reports and the CLI."""
