"""
Test suite for TuringFlow
=========================

- Unit tests for machines, encodings, calculus, descriptors and utilities
- Integration tests for suspensions, gluing, checks and the CLI
- Acceptance tests at release sample sizes
"""
