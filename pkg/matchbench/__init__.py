"""
matchbench - Schema Matching Experiment Harness
String-similarity baselines, LLM-prompted matching and evaluation.
"""

__version__ = "1.0.0"
