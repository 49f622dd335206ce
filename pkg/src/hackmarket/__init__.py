"""Product categorization for malicious-hacking marketplace listings."""

__version__ = "0.1.0"
