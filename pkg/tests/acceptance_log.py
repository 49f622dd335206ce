# Criterion number -> (passed, summary); filled by test_acceptance.py.
RESULTS: dict[int, tuple[bool, str]] = {}
