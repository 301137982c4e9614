"""Chat-driven decision support for lettuce cultivation.

A self-contained stand-in for a LINE-style farm chatbot: wire-protocol
gateway, rule-based intent matching with typo suggestions, threshold
recommendations over simulated sensor telemetry, drip/mist irrigation
control, daily briefings, and append-only persistence.
"""

__version__ = "0.1.0"
